#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "physid/barrier.hpp"
#include "physid/dynamics.hpp"
#include "physid/model.hpp"
#include "physid/signals.hpp"

namespace physid {

inline constexpr double kDefaultSubspaceThreshold = 1e-8;

struct SubspaceReport {
  int rank = 0;
  Eigen::MatrixXd identifiable_basis;    // cols × rank, orthonormal
  Eigen::MatrixXd unidentifiable_basis;  // cols × (cols − rank)
  Eigen::VectorXd singular_values;       // descending
  double threshold = kDefaultSubspaceThreshold;

  Eigen::MatrixXd identifiable_projector() const {
    return identifiable_basis * identifiable_basis.transpose();
  }
  Eigen::MatrixXd unidentifiable_projector() const {
    return unidentifiable_basis * unidentifiable_basis.transpose();
  }
};

/// SVD of W; rank counts σ_i > threshold · σ_max.
SubspaceReport identifiable_subspace(const Eigen::MatrixXd& W,
                                     double threshold = kDefaultSubspaceThreshold);

struct IdentificationResult {
  std::string method;
  ParamVector alpha_hat;             // full 13N, fixed entries included
  double residual = 0.0;             // ‖Wα̂ + w0 − T‖²
  std::vector<FeasibilityReport> feasibility;  // per link, tol 0
  SubspaceReport subspace;           // of the free columns
  std::vector<BarrierStage> trace;   // empty for OLS
  bool converged = true;
  double reg_weight = 0.0;
};

/// Minimum-norm least squares on the identifiable subspace; unidentifiable
/// directions are taken from `prior` (zeros when empty). Throws
/// ValidationError on an empty stack.
IdentificationResult ols_identify(const RegressorStack& stack, const ParamVector& prior = {},
                                  double threshold = kDefaultSubspaceThreshold);

/// Physically consistent fit: minimizes ‖Wα + w0 − T‖² + w‖P_u(α − prior)‖²
/// with every link's pseudo-inertia ≻ 0 and friction/rotor entries > 0.
/// `reg_weight < 0` selects 1e-3 σ_max². The prior must be strictly feasible;
/// it is the barrier's starting point. Throws ValidationError for an
/// infeasible prior and SolverError if the Newton iterations break down.
IdentificationResult consistent_identify(const RegressorStack& stack, const ParamVector& prior,
                                         double reg_weight = -1.0,
                                         const BarrierOptions& options = {},
                                         double threshold = kDefaultSubspaceThreshold);

/// A strictly feasible prior derived from the model's own parameters: links
/// whose pseudo-inertia is not positive definite get a unit-mass compact body,
/// non-positive friction and rotor entries are raised to 1e-4.
ParamVector interior_prior(const RobotModel& model);

/// Free mask that leaves only the ten inertial parameters of `link` free.
std::vector<bool> payload_fixed_mask(int dof, int link);

struct PayloadResult {
  LinkInertialParams p;                 // object, last-link frame
  double min_eigenvalue = 0.0;          // of J_p
  double composite_min_eigenvalue = 0.0;
  double residual = 0.0;
  bool boundary_warning = false;
  std::string object_frame = "last-link frame";
  LinkInertialParams unconstrained_difference;  // least-squares difference, no constraints
  std::vector<BarrierStage> trace;
  bool converged = true;
};

/// Object parameters as the difference between the loaded last link and the
/// base estimate. `stack` must have been built with exactly the last link's
/// ten inertial parameters free and the rest fixed to `base_params`.
PayloadResult payload_identify(const RegressorStack& stack, const ParamVector& base_params,
                               int last_link_index, double reg_weight = -1.0,
                               const BarrierOptions& options = {});

/// Re-expresses body parameters in a frame whose pose in the current frame
/// is `frame`. This is the hook for object-frame alignment.
LinkInertialParams express_in_frame(const LinkInertialParams& p, const Eigen::Isometry3d& frame);

struct ErrorMetrics {
  double mass_pct = 0.0;
  double com_pct = 0.0;
  double inertia_pct = 0.0;
};

/// mass: 100|m̂−m|/m; CoM: 100‖ĉ−c‖/char_length; inertia: 100‖Î−I‖_F/‖I‖_F
/// with both inertias about their own CoM. Throws ValidationError if the
/// truth mass or char_length is not positive.
ErrorMetrics error_metrics(const LinkInertialParams& estimate, const LinkInertialParams& truth,
                           double char_length);

/// Base parameter sets recorded at different gripper configurations.
/// `cutoffs` are the filter settings the set was identified with; the loaded
/// data should be processed the same way so that filter bias cancels.
struct BaseParamSet {
  double label = 0.0;
  ParamVector params;
  std::optional<CutoffPair> cutoffs;
};

/// The set whose label is nearest to `label` (first on ties).
const BaseParamSet& select_base_params(const std::vector<BaseParamSet>& sets, double label);

}  // namespace physid
