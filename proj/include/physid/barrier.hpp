#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace physid {

/// Affine 4×4 matrix J(x) = offset + Σ_k x_k · terms[k].second, required ≻ 0.
struct LmiBlock {
  Eigen::Matrix4d offset = Eigen::Matrix4d::Zero();
  std::vector<std::pair<int, Eigen::Matrix4d>> terms;
  std::string name;

  Eigen::Matrix4d evaluate(const Eigen::VectorXd& x) const;
};

/// Affine scalar offset + Σ coeffs[k].second · x_k, required > 0.
struct ScalarBound {
  double offset = 0.0;
  std::vector<std::pair<int, double>> terms;
  std::string name;

  double evaluate(const Eigen::VectorXd& x) const;
};

/// minimize ‖A x − b‖² + (x − c)ᵀ R (x − c)   s.t.  every LMI ≻ 0, every bound > 0.
struct BarrierProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd R;  // empty means no regularization
  Eigen::VectorXd center;
  std::vector<LmiBlock> lmis;
  std::vector<ScalarBound> bounds;

  int size() const { return static_cast<int>(A.cols()); }
  double objective(const Eigen::VectorXd& x) const;
  bool strictly_feasible(const Eigen::VectorXd& x) const;
};

struct BarrierOptions {
  double mu_initial = 0.0;  // ≤ 0 selects F(x0) / (barrier dimension)
  double mu_final = 1e-10;
  double mu_factor = 0.2;
  int max_newton_iterations = 200;
  // Centering stops when λ²/(2μ) falls below this, λ the Newton decrement.
  double centering_tolerance = 1e-10;
};

/// One μ stage of the path-following loop.
struct BarrierStage {
  double mu = 0.0;
  double objective = 0.0;          // ‖Ax − b‖² + regularization at the stage's center
  double barrier_objective = 0.0;  // objective − μ Σ log det − μ Σ log
  int newton_iterations = 0;
  double decrement = 0.0;
};

struct BarrierResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  bool converged = false;
  std::string message;
  std::vector<BarrierStage> trace;
};

/// Path-following log-det barrier method with damped Newton centering.
/// Throws ValidationError if x0 is not strictly feasible.
BarrierResult solve_barrier(const BarrierProblem& problem, const Eigen::VectorXd& x0,
                            const BarrierOptions& options = {});

}  // namespace physid
