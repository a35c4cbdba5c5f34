#pragma once

#include <stdexcept>
#include <string>

namespace physid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document. `line()` is 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Well-formed input that violates a model or data contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Kinematic structure outside the supported serial revolute chain.
class UnsupportedTopologyError : public Error {
 public:
  using Error::Error;
};

/// Sizes of vectors, matrices or sample lists do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to make progress.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace physid
