#include "physid/al_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "physid/errors.hpp"

namespace physid {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double v) { return std::isnan(v) ? kInf : v; }

struct Incumbent {
  Eigen::VectorXd x;
  double objective = kInf;
  double infeasibility = kInf;
  bool feasible = false;
  bool set = false;

  void offer(const Eigen::VectorXd& cand, double f, double infeas, double tol) {
    const bool cand_feasible = infeas <= tol && std::isfinite(f);
    bool better = false;
    if (!set) {
      better = true;
    } else if (cand_feasible != feasible) {
      better = cand_feasible;
    } else if (cand_feasible) {
      better = f < objective;
    } else {
      better = infeas < infeasibility || (infeas == infeasibility && f < objective);
    }
    if (better) {
      x = cand;
      objective = f;
      infeasibility = infeas;
      feasible = cand_feasible;
      set = true;
    }
  }
};

}  // namespace

double ConstraintValues::infeasibility() const {
  double v = 0.0;
  for (double c : equalities) v = std::max(v, std::isnan(c) ? kInf : std::abs(c));
  for (double h : inequalities) v = std::max(v, std::isnan(h) ? kInf : h);
  return v;
}

Eigen::VectorXd nelder_mead(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                            const Eigen::VectorXd& step, int budget, long* evaluations) {
  const Eigen::Index n = x0.size();
  if (step.size() != n) throw DimensionError("simplex step size mismatch");
  long count = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++count;
    return sanitize(f(x));
  };
  const double dn = static_cast<double>(std::max<Eigen::Index>(n, 1));
  // Dimension-adaptive coefficients (Gao & Han).
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / dn;
  const double contract = 0.75 - 1.0 / (2.0 * dn);
  const double shrink = n > 1 ? 1.0 - 1.0 / dn : 0.5;

  Eigen::VectorXd best = x0;
  double best_f = eval(x0);
  if (n == 0) {
    if (evaluations) *evaluations += count;
    return best;
  }
  double scale = 1.0;
  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1));
  std::vector<double> values(static_cast<std::size_t>(n + 1));
  std::vector<std::size_t> order(static_cast<std::size_t>(n + 1));

  while (count < budget && scale > 1e-9) {
    simplex[0] = best;
    values[0] = best_f;
    for (Eigen::Index i = 0; i < n && count < budget; ++i) {
      simplex[static_cast<std::size_t>(i + 1)] = best;
      simplex[static_cast<std::size_t>(i + 1)](i) += scale * (step(i) != 0.0 ? step(i) : 1.0);
      values[static_cast<std::size_t>(i + 1)] = eval(simplex[static_cast<std::size_t>(i + 1)]);
    }
    if (count >= budget) break;
    const double start_f = best_f;

    while (count < budget) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t lo = order.front();
      const std::size_t hi = order.back();
      const std::size_t second = order[order.size() - 2];

      double diameter = 0.0;
      for (std::size_t i = 0; i < simplex.size(); ++i) {
        diameter = std::max(diameter, (simplex[i] - simplex[lo]).cwiseAbs().maxCoeff());
      }
      const double spread = values[hi] - values[lo];
      const double fscale = std::abs(values[lo]) + 1e-300;
      if (diameter <= 1e-11 * (1.0 + simplex[lo].cwiseAbs().maxCoeff()) ||
          (std::isfinite(spread) && spread <= 1e-15 * fscale)) {
        break;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (std::size_t i = 0; i < simplex.size(); ++i) {
        if (i != hi) centroid += simplex[i];
      }
      centroid /= dn;

      const Eigen::VectorXd xr = centroid + reflect * (centroid - simplex[hi]);
      const double fr = eval(xr);
      if (fr < values[lo]) {
        const Eigen::VectorXd xe = centroid + expand * (xr - centroid);
        const double fe = count < budget ? eval(xe) : kInf;
        if (fe < fr) {
          simplex[hi] = xe;
          values[hi] = fe;
        } else {
          simplex[hi] = xr;
          values[hi] = fr;
        }
        continue;
      }
      if (fr < values[second]) {
        simplex[hi] = xr;
        values[hi] = fr;
        continue;
      }
      const bool outside = fr < values[hi];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + contract * (xr - centroid))
                                         : Eigen::VectorXd(centroid + contract * (simplex[hi] - centroid));
      const double fc = count < budget ? eval(xc) : kInf;
      if (fc < (outside ? fr : values[hi])) {
        simplex[hi] = xc;
        values[hi] = fc;
        continue;
      }
      for (std::size_t i = 0; i < simplex.size() && count < budget; ++i) {
        if (i == lo) continue;
        simplex[i] = simplex[lo] + shrink * (simplex[i] - simplex[lo]);
        values[i] = eval(simplex[i]);
      }
    }

    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (values[i] < best_f) {
        best_f = values[i];
        best = simplex[i];
      }
    }
    // Restart around the incumbent; shrink the simplex once restarts stop paying off.
    if (!(best_f < start_f - 1e-12 * std::abs(start_f))) scale *= 0.1;
  }
  if (evaluations) *evaluations += count;
  return best;
}

ALResult augmented_lagrangian_minimize(const ObjectiveFn& objective, const ConstraintFn& constraints,
                                       const Eigen::VectorXd& x0, const ALOptions& opts,
                                       const RestartSampler& sampler) {
  if (!(opts.penalty_growth > 1.0)) throw ValidationError("penalty growth must exceed 1");
  if (!(opts.max_penalty >= opts.initial_penalty) || !(opts.initial_penalty > 0.0)) {
    throw ValidationError("penalties must satisfy 0 < initial_penalty <= max_penalty");
  }
  if (opts.outer_iterations <= 0 || opts.subproblem_budget <= 0) {
    throw ValidationError("solver budgets must be positive");
  }
  const Eigen::Index n = x0.size();
  Eigen::VectorXd step = Eigen::VectorXd::Constant(n, opts.initial_step);
  if (opts.step_scale.size() == n) step = step.cwiseProduct(opts.step_scale);

  ALResult result;
  Incumbent incumbent;
  const double tol = opts.constraint_tolerance;
  const double bound = opts.multiplier_bounds;

  ConstraintValues c0 = constraints(x0);
  std::vector<double> mu_eq(c0.equalities.size(), 0.0);
  std::vector<double> mu_in(c0.inequalities.size(), 0.0);
  double rho = opts.initial_penalty;

  auto lagrangian = [&](double f, const ConstraintValues& c) {
    if (!std::isfinite(f)) return kInf;
    double L = f;
    for (std::size_t i = 0; i < c.equalities.size(); ++i) {
      L += mu_eq[i] * c.equalities[i] + 0.5 * rho * c.equalities[i] * c.equalities[i];
    }
    for (std::size_t j = 0; j < c.inequalities.size(); ++j) {
      const double t = std::max(0.0, mu_in[j] + rho * c.inequalities[j]);
      L += (t * t - mu_in[j] * mu_in[j]) / (2.0 * rho);
    }
    return sanitize(L);
  };
  auto evaluate = [&](const Eigen::VectorXd& x) {
    const double f = sanitize(objective(x));
    const ConstraintValues c = constraints(x);
    if (c.equalities.size() != mu_eq.size() || c.inequalities.size() != mu_in.size()) {
      throw DimensionError("constraint count changed between evaluations");
    }
    incumbent.offer(x, f, c.infeasibility(), tol);
    return lagrangian(f, c);
  };

  Eigen::VectorXd x = x0;
  double f0 = sanitize(objective(x0));
  ++result.evaluations;
  incumbent.offer(x0, f0, c0.infeasibility(), tol);
  double prev_infeas = c0.infeasibility();
  double prev_f = f0;

  const int restarts = std::max(0, opts.restarts);
  const int run_budget = std::max(1, opts.subproblem_budget / (restarts + 1));
  for (int k = 0; k < opts.outer_iterations; ++k) {
    const ObjectiveFn L = evaluate;
    long evals = 0;
    Eigen::VectorXd sub_best = nelder_mead(L, x, step, run_budget, &evals);
    double sub_best_L = evaluate(sub_best);
    ++evals;
    for (int r = 0; r < restarts; ++r) {
      std::mt19937_64 rng(splitmix64(opts.seed ^ splitmix64(static_cast<std::uint64_t>(k) * 1000003ULL +
                                                            static_cast<std::uint64_t>(r) + 1ULL)));
      Eigen::VectorXd start;
      if (sampler) {
        start = sampler(rng);
      } else {
        std::normal_distribution<double> normal(0.0, 1.0);
        start = x;
        for (Eigen::Index i = 0; i < n; ++i) start(i) += step(i) * normal(rng);
      }
      if (start.size() != n) throw DimensionError("restart sampler returned the wrong size");
      const Eigen::VectorXd cand = nelder_mead(L, start, step, run_budget, &evals);
      const double cand_L = evaluate(cand);
      ++evals;
      if (cand_L < sub_best_L) {
        sub_best = cand;
        sub_best_L = cand_L;
      }
    }
    result.evaluations += evals;
    x = sub_best;

    const double f = sanitize(objective(x));
    const ConstraintValues c = constraints(x);
    ++result.evaluations;
    const double infeas = c.infeasibility();

    ALIteration it;
    it.iteration = k;
    it.penalty = rho;
    it.objective = f;
    it.infeasibility = infeas;
    it.lagrangian = sub_best_L;
    it.evaluations = result.evaluations;
    result.history.push_back(it);

    for (std::size_t i = 0; i < mu_eq.size(); ++i) {
      mu_eq[i] = std::clamp(mu_eq[i] + rho * c.equalities[i], -bound, bound);
    }
    for (std::size_t j = 0; j < mu_in.size(); ++j) {
      mu_in[j] = std::clamp(std::max(0.0, mu_in[j] + rho * c.inequalities[j]), 0.0, bound);
    }
    if (infeas > tol && infeas > 0.25 * prev_infeas) {
      rho = std::min(rho * opts.penalty_growth, opts.max_penalty);
    }

    const bool settled = infeas <= tol && std::abs(f - prev_f) <= 1e-10 * (1.0 + std::abs(f));
    prev_infeas = infeas;
    prev_f = f;
    if (settled && k > 0) break;
  }

  result.x = incumbent.x;
  result.objective = incumbent.objective;
  result.infeasibility = incumbent.infeasibility;
  result.feasible = incumbent.feasible;
  return result;
}

}  // namespace physid
