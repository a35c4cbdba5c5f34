#include "physid/barrier.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "physid/errors.hpp"

namespace physid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// −Σ log det J − Σ log s, +∞ outside the open feasible set.
double barrier_value(const BarrierProblem& p, const Eigen::VectorXd& x) {
  double value = 0.0;
  for (const LmiBlock& lmi : p.lmis) {
    Eigen::LLT<Eigen::Matrix4d> llt(lmi.evaluate(x));
    if (llt.info() != Eigen::Success) return kInf;
    const Eigen::Vector4d diag = llt.matrixLLT().diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) return kInf;
    value -= 2.0 * diag.array().log().sum();
  }
  for (const ScalarBound& bound : p.bounds) {
    const double s = bound.evaluate(x);
    if (!(s > 0.0)) return kInf;
    value -= std::log(s);
  }
  return value;
}

void barrier_derivatives(const BarrierProblem& p, const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                         Eigen::MatrixXd& hess) {
  const int n = p.size();
  grad = Eigen::VectorXd::Zero(n);
  hess = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::Matrix4d> G;
  for (const LmiBlock& lmi : p.lmis) {
    const Eigen::Matrix4d Jinv = lmi.evaluate(x).llt().solve(Eigen::Matrix4d::Identity());
    G.resize(lmi.terms.size());
    for (std::size_t a = 0; a < lmi.terms.size(); ++a) {
      G[a] = Jinv * lmi.terms[a].second;
      grad(lmi.terms[a].first) -= G[a].trace();
    }
    for (std::size_t a = 0; a < lmi.terms.size(); ++a) {
      for (std::size_t b = a; b < lmi.terms.size(); ++b) {
        // tr(G_a G_b)
        const double v = (G[a].array() * G[b].transpose().array()).sum();
        hess(lmi.terms[a].first, lmi.terms[b].first) += v;
        if (b != a) hess(lmi.terms[b].first, lmi.terms[a].first) += v;
      }
    }
  }
  for (const ScalarBound& bound : p.bounds) {
    const double s = bound.evaluate(x);
    for (const auto& [i, ci] : bound.terms) {
      grad(i) -= ci / s;
      for (const auto& [j, cj] : bound.terms) hess(i, j) += ci * cj / (s * s);
    }
  }
}

}  // namespace

Eigen::Matrix4d LmiBlock::evaluate(const Eigen::VectorXd& x) const {
  Eigen::Matrix4d J = offset;
  for (const auto& [k, A] : terms) J += x(k) * A;
  return J;
}

double ScalarBound::evaluate(const Eigen::VectorXd& x) const {
  double s = offset;
  for (const auto& [k, c] : terms) s += c * x(k);
  return s;
}

double BarrierProblem::objective(const Eigen::VectorXd& x) const {
  double f = (A * x - b).squaredNorm();
  if (R.size() > 0) {
    const Eigen::VectorXd d = x - center;
    f += d.dot(R * d);
  }
  return f;
}

bool BarrierProblem::strictly_feasible(const Eigen::VectorXd& x) const {
  return std::isfinite(barrier_value(*this, x));
}

BarrierResult solve_barrier(const BarrierProblem& problem, const Eigen::VectorXd& x0,
                            const BarrierOptions& options) {
  const int n = problem.size();
  if (x0.size() != n) throw DimensionError("barrier start point has the wrong size");
  if (problem.b.size() != problem.A.rows()) throw DimensionError("barrier A and b disagree");
  const bool has_reg = problem.R.size() > 0;
  if (has_reg && (problem.R.rows() != n || problem.R.cols() != n || problem.center.size() != n)) {
    throw DimensionError("barrier regularization has the wrong size");
  }
  if (!problem.strictly_feasible(x0)) {
    throw ValidationError("barrier start point is not strictly feasible");
  }

  // ‖Ax − b‖² = ‖Rx − Qᵀb‖² + const; the line search only needs differences,
  // so the tall system is compressed to its triangular factor once.
  BarrierProblem compact = problem;
  if (problem.A.rows() > n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(problem.A);
    compact.A = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    compact.b = (qr.householderQ().transpose() * problem.b).head(n);
  }

  Eigen::MatrixXd hess_f = 2.0 * problem.A.transpose() * problem.A;
  if (has_reg) hess_f += 2.0 * problem.R;
  auto grad_f = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = 2.0 * compact.A.transpose() * (compact.A * x - compact.b);
    if (has_reg) g += 2.0 * problem.R * (x - problem.center);
    return g;
  };

  const double dim = 4.0 * static_cast<double>(problem.lmis.size()) +
                     static_cast<double>(problem.bounds.size());
  double mu = options.mu_initial;
  if (!(mu > 0.0)) mu = std::max(problem.objective(x0), 1e-6) / std::max(dim, 1.0);

  BarrierResult result;
  result.x = x0;
  result.converged = true;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd grad_b;
  Eigen::MatrixXd hess_b;
  while (true) {
    BarrierStage stage;
    stage.mu = mu;
    auto phi = [&](const Eigen::VectorXd& y) {
      const double b = barrier_value(problem, y);
      return std::isfinite(b) ? compact.objective(y) + mu * b : kInf;
    };
    double phi_x = phi(x);
    for (int it = 0; it < options.max_newton_iterations; ++it) {
      barrier_derivatives(problem, x, grad_b, hess_b);
      const Eigen::VectorXd g = grad_f(x) + mu * grad_b;
      Eigen::MatrixXd H = hess_f + mu * hess_b;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      Eigen::VectorXd step = -ldlt.solve(g);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        H.diagonal().array() += 1e-12 * std::max(H.diagonal().maxCoeff(), 1.0);
        step = -H.ldlt().solve(g);
      }
      const double lambda2 = -g.dot(step);
      stage.decrement = lambda2;
      if (!std::isfinite(lambda2)) {
        result.converged = false;
        result.message = "non-finite Newton step at mu=" + std::to_string(mu);
        break;
      }
      if (lambda2 <= 0.0 || lambda2 / (2.0 * mu) <= options.centering_tolerance) break;

      double t = 1.0;
      bool accepted = false;
      while (t > 1e-14) {
        const Eigen::VectorXd trial = x + t * step;
        const double phi_t = phi(trial);
        if (phi_t <= phi_x - 0.25 * t * lambda2) {
          x = trial;
          phi_x = phi_t;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      ++stage.newton_iterations;
      // A failed line search this close to the center is round-off, not divergence.
      if (!accepted) break;
    }
    stage.objective = problem.objective(x);
    stage.barrier_objective = stage.objective + mu * barrier_value(problem, x);
    result.trace.push_back(stage);
    if (!result.converged) break;
    if (mu <= options.mu_final) break;
    mu = std::max(mu * options.mu_factor, options.mu_final);
  }
  result.x = x;
  result.objective = problem.objective(x);
  return result;
}

}  // namespace physid
