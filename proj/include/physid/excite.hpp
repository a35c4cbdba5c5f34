#pragma once

#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "physid/al_solver.hpp"
#include "physid/dynamics.hpp"
#include "physid/model.hpp"

namespace physid {

inline constexpr double kDefaultBaseFrequency = 2.0 * std::numbers::pi * 0.1;
inline constexpr int kDefaultHarmonics = 5;
inline constexpr double kDefaultGamma = 0.1;

/// q_i(t) = q0_i + Σ_l (a_il/(ωl)) sin(ωlt) − (b_il/(ωl)) cos(ωlt).
struct FourierTrajectory {
  double omega = kDefaultBaseFrequency;
  int harmonics = kDefaultHarmonics;
  Eigen::VectorXd q0;
  Eigen::MatrixXd a;  // N × L
  Eigen::MatrixXd b;  // N × L
  double duration = 0.0;

  /// Zero coefficients; duration one fundamental period.
  static FourierTrajectory zeros(int dof, double omega, int harmonics);

  int dof() const { return static_cast<int>(q0.size()); }
  double period() const { return 2.0 * std::numbers::pi / omega; }
  int decision_size() const { return dof() * (2 * harmonics + 1); }

  /// Decision vector: q0, then a row-major, then b row-major.
  Eigen::VectorXd to_vector() const;
  static FourierTrajectory from_vector(const Eigen::VectorXd& x, int dof, double omega,
                                       int harmonics);
};

/// Throws ValidationError for t outside [0, duration] or an invalid trajectory.
JointState fourier_eval(const FourierTrajectory& traj, double t);

/// Uniform sample times k/rate on [0, duration], endpoint included when it
/// falls on the grid.
std::vector<double> sample_times(double duration, double rate);

std::vector<JointState> sample_trajectory(const FourierTrajectory& traj, double rate);

struct InformationValue {
  double value = 0.0;
  double f_c = 0.0;
  double f_e = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Eigenvalues of WᵀW from the singular values of W; f_c = √(λmax/λmin),
/// f_e = −λmin, value = f_c + γ f_e. Rank-deficient W (λmin ≤ 1e-12 λmax)
/// yields an infinite value and f_c.
InformationValue information_objective(const Eigen::MatrixXd& W, double gamma);

struct Sphere {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

struct DesignProblem {
  RobotModel model;
  double sample_rate = 100.0;
  double gamma = kDefaultGamma;
  std::vector<Sphere> obstacles;                    // world frame
  std::vector<std::vector<Sphere>> link_spheres;    // per link, link frame
  double collision_margin = 0.0;
  double velocity_boundary_tolerance = 1e-3;
  double acceleration_boundary_tolerance = 1e-3;
  bool use_full_regressor = false;
  double subspace_threshold = 1e-8;
};

struct NamedValue {
  std::string name;
  double value = 0.0;
};

struct ConstraintRecord {
  std::vector<NamedValue> equalities;    // = 0
  std::vector<NamedValue> inequalities;  // ≤ 0

  ConstraintValues values() const;
  double max_violation() const;
  const NamedValue* find(const std::string& name) const;
};

inline constexpr double kSmoothMaxSharpness = 50.0;

/// Limit margins per joint as log-sum-exp smooth maxima (β = 50) over the
/// samples (an upper bound of the true maximum), boundary velocities and
/// accelerations at 0 and the duration, and one clearance inequality per
/// (link sphere, obstacle) pair.
ConstraintRecord evaluate_constraints(const FourierTrajectory& traj, const DesignProblem& problem);

/// Orthonormal basis of parameter directions that influence torques over
/// random states in the joint limits (structural identifiability).
Eigen::MatrixXd structural_identifiable_basis(const RobotModel& model, double threshold,
                                              std::uint64_t seed = 0);

/// Information objective of the stacked regressor along `traj`, projected
/// onto `basis` when it is non-empty.
InformationValue trajectory_information(const FourierTrajectory& traj, const DesignProblem& problem,
                                        const Eigen::MatrixXd& basis);

/// Fourier trajectory with random coefficients satisfying the boundary
/// equalities exactly, q0 at the middle of each joint range, scaled to the
/// largest amplitude that satisfies every inequality. Returns nullopt when no
/// scale works.
std::optional<FourierTrajectory> random_feasible_trajectory(const DesignProblem& problem,
                                                            double omega, int harmonics,
                                                            std::mt19937_64& rng);

struct DesignReport {
  InformationValue initial;
  InformationValue final;
  ConstraintRecord constraints;
  long evaluations = 0;
  bool feasible = false;
  int rank = 0;
  std::vector<ALIteration> history;
};

struct DesignResult {
  FourierTrajectory trajectory;
  DesignReport report;
};

/// Minimizes the information objective over (q0, a, b) subject to the
/// constraints with the augmented Lagrangian solver. Starts from a seeded
/// random feasible trajectory; restarts draw from the same generator.
DesignResult design_trajectory(const DesignProblem& problem, double omega, int harmonics,
                               const ALOptions& opts);

}  // namespace physid
