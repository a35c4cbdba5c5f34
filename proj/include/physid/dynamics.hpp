#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "physid/model.hpp"

namespace physid {

struct JointState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
  Eigen::VectorXd qdd;
};

/// Throws DimensionError on size mismatch, ValidationError on non-finite values.
void check_state(const RobotModel& model, const JointState& s);

/// World pose of every link frame.
std::vector<Eigen::Isometry3d> forward_kinematics(const RobotModel& model,
                                                  const Eigen::VectorXd& q);

/// Measured-torque model: τ = M(q)q̈ + C(q,q̇)q̇ − τ_g(q) + τ_f(q̇) + τ_r(q̈),
/// with τ_f = μ_v q̇ + μ_c tanh(q̇/ε) and τ_r = I_r q̈. Recursive Newton-Euler.
Eigen::VectorXd inverse_dynamics(const RobotModel& model, const JointState& s);

/// N × 13N matrix W(q, q̇, q̈) with W · pack_params(model) = inverse_dynamics.
/// Only kinematics and gravity of `model` are used.
Eigen::MatrixXd regressor(const RobotModel& model, const JointState& s);

struct RegressorStack {
  Eigen::MatrixXd W;   // (S·N) × free-parameter count
  Eigen::VectorXd w0;  // contribution of fixed parameters
  Eigen::VectorXd T;   // measured torques
  int sample_count = 0;
  int dof = 0;
  // Indices into the full 13N vector of the columns of W.
  std::vector<int> free_indices;
  // Full 13N vector; entries at fixed indices are the held values.
  Eigen::VectorXd fixed_values;

  int free_count() const { return static_cast<int>(free_indices.size()); }
  /// Full parameter vector with `free` scattered into the free slots.
  Eigen::VectorXd expand(const Eigen::VectorXd& free) const;
  /// Free entries of a full 13N vector.
  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;
};

/// Stacks rows for every sample. Parameters with `fixed_mask[k] == true`
/// are moved into w0 using `fixed_values`. Empty mask means all free.
RegressorStack stack_regressor(const RobotModel& model,
                               const std::vector<JointState>& states,
                               const std::vector<Eigen::VectorXd>& torques,
                               const std::vector<bool>& fixed_mask = {},
                               const ParamVector& fixed_values = {});

/// Debug dump, one row per torque equation: W columns, w0, T.
void write_stack_csv(std::ostream& out, const RegressorStack& stack);

}  // namespace physid
