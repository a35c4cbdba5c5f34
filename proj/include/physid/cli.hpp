#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace physid {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitWarning = 2;

/// Entry point of the `physid` tool; `args` excludes the program name.
/// Subcommands: design, simulate, identify, tune-filters, report, export-fixture.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace physid
