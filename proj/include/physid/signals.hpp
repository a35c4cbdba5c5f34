#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "physid/dynamics.hpp"
#include "physid/model.hpp"

namespace physid {

/// One recorded run. `q` and `tau` are S × N, one row per sample.
struct RawTrial {
  Eigen::VectorXd timestamps;
  Eigen::MatrixXd q;
  Eigen::MatrixXd tau;

  int samples() const { return static_cast<int>(timestamps.size()); }
  int dof() const { return static_cast<int>(q.cols()); }
  double sample_rate() const;
};

/// Throws ValidationError unless the trial has ≥ 16 samples on a uniform
/// grid (jitter < 1e-6 s) with consistent dimensions.
void validate_trial(const RawTrial& trial);

struct ProcessedDataset {
  std::vector<JointState> states;
  std::vector<Eigen::VectorXd> torques;
  Eigen::VectorXd timestamps;
  double sample_rate = 0.0;
  // Non-positive means the class was left unfiltered.
  double position_cutoff = 0.0;
  double torque_cutoff = 0.0;
};

/// Zero-phase low-pass: second-order Butterworth biquad run forward and
/// backward with odd-reflection padding. Throws ValidationError unless
/// 0 < cutoff < rate/2.
Eigen::VectorXd lowpass_zero_phase(const Eigen::VectorXd& x, double cutoff, double rate);
/// Column-wise version.
Eigen::MatrixXd lowpass_zero_phase(const Eigen::MatrixXd& x, double cutoff, double rate);

/// Two passes of the five-point central first-derivative stencil. The first
/// pass leaves `kDerivativeTrim` invalid samples at each end of `qd`, the
/// second a further `kDerivativeTrim` for `qdd`; invalid entries are NaN.
inline constexpr int kDerivativeTrim = 2;
struct Derivatives {
  Eigen::MatrixXd qd;
  Eigen::MatrixXd qdd;
};
Derivatives differentiate_twice(const Eigen::MatrixXd& q, double rate);

/// Five-point central first derivative of the columns of `x`; only rows
/// [2, S−3] of the result are meaningful, the rest are NaN.
Eigen::MatrixXd central_derivative(const Eigen::MatrixXd& x, double rate);

/// Elementwise mean. Throws ValidationError if grids or sizes differ.
RawTrial average_trials(const std::vector<RawTrial>& trials);

/// Filter positions, differentiate, filter each derivative with the position
/// cutoff again; filter torques with their own cutoff; trim the edges left
/// invalid by differentiation. A nullopt cutoff skips that filter.
ProcessedDataset process_trial(const RawTrial& trial, std::optional<double> position_cutoff,
                               std::optional<double> torque_cutoff);

struct CutoffPair {
  double position = 0.0;
  double torque = 0.0;
};

/// {2, 4, 6, 8, 10, 15, 20} Hz for each class, position-major.
std::vector<CutoffPair> default_cutoff_grid();
/// The default values plus 0 (unfiltered) for each class: 64 pairs.
std::vector<CutoffPair> cutoff_grid_with_unfiltered();

struct CutoffEvaluation {
  CutoffPair cutoffs;
  bool ok = false;
  double residual = 0.0;
  std::string error;
};

struct CutoffSearchResult {
  CutoffPair best;
  double best_residual = 0.0;
  std::vector<CutoffEvaluation> table;  // same order as the grid
};

/// Processes `trial` at every grid point, runs the physically consistent
/// identification with the model's parameters as prior and keeps the point
/// with the smallest fit residual. A non-positive cutoff leaves that class
/// unfiltered. Failed points are recorded and skipped;
/// exact ties go to the lower (position, torque) pair. Throws
/// ValidationError on an empty grid and SolverError if every point fails.
CutoffSearchResult tune_filter_cutoffs(const RawTrial& trial, const RobotModel& model,
                                       const std::vector<CutoffPair>& grid);

/// Header `t,q_1..q_N,tau_1..tau_N`.
void write_trial_csv(std::ostream& out, const RawTrial& trial);
/// Throws ParseError naming the offending row.
RawTrial read_trial_csv(std::istream& in);

/// Header `t,q_*,qd_*,qdd_*,tau_*`.
void write_processed_csv(std::ostream& out, const ProcessedDataset& data);

}  // namespace physid
