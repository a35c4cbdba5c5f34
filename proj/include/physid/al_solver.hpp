#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace physid {

/// Seed mixer used to derive independent per-run seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Equalities c(x) = 0 and inequalities h(x) ≤ 0.
struct ConstraintValues {
  std::vector<double> equalities;
  std::vector<double> inequalities;

  /// max(|c_i|, max(0, h_j)); 0 when there are no constraints.
  double infeasibility() const;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using ConstraintFn = std::function<ConstraintValues(const Eigen::VectorXd&)>;
/// Produces a starting point for a random restart.
using RestartSampler = std::function<Eigen::VectorXd(std::mt19937_64&)>;

struct ALOptions {
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e8;
  double multiplier_bounds = 1e8;
  int outer_iterations = 20;
  int subproblem_budget = 2000;
  double constraint_tolerance = 1e-6;
  std::uint64_t seed = 0;
  // Random restarts attempted per subproblem, on top of the warm start.
  int restarts = 2;
  // Initial simplex edge, multiplied per coordinate by `step_scale` if set.
  double initial_step = 0.1;
  Eigen::VectorXd step_scale;
};

struct ALIteration {
  int iteration = 0;
  double penalty = 0.0;
  double objective = 0.0;
  double infeasibility = 0.0;
  double lagrangian = 0.0;
  long evaluations = 0;
};

struct ALResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double infeasibility = 0.0;
  bool feasible = false;
  long evaluations = 0;
  std::vector<ALIteration> history;
};

/// Direct-search minimization of `f` from `x0` within `budget` evaluations:
/// adaptive Nelder-Mead, restarted around the incumbent whenever the simplex
/// collapses. Returns the best point found; `evaluations` receives the count.
Eigen::VectorXd nelder_mead(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                            const Eigen::VectorXd& step, int budget, long* evaluations = nullptr);

/// Augmented Lagrangian outer loop with derivative-free subproblems.
///
/// L(x) = f(x) + Σ μ_i c_i + ρ/2 Σ c_i² + 1/(2ρ) Σ (max(0, ν_j + ρ h_j)² − ν_j²)
///
/// Multipliers follow μ ← μ + ρc, ν ← max(0, ν + ρh), both clamped to
/// ±multiplier_bounds; ρ grows by penalty_growth, up to max_penalty, whenever
/// the infeasibility exceeds the tolerance and fails to shrink fourfold. Each subproblem starts from the current iterate
/// plus `restarts` seeded random starts (from `sampler`, or a Gaussian around
/// the iterate). The returned point is the best feasible one seen (within
/// constraint_tolerance), else the least infeasible; `feasible` flags which.
/// Non-finite objective values are treated as worst rather than as errors.
ALResult augmented_lagrangian_minimize(const ObjectiveFn& objective,
                                       const ConstraintFn& constraints,
                                       const Eigen::VectorXd& x0, const ALOptions& opts,
                                       const RestartSampler& sampler = {});

}  // namespace physid
