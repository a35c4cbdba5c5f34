#include <cmath>

#include <Eigen/QR>

#include "physid/errors.hpp"
#include "physid/excite.hpp"

namespace physid {

namespace {

bool inequalities_hold(const FourierTrajectory& traj, const DesignProblem& problem) {
  for (const NamedValue& h : evaluate_constraints(traj, problem).inequalities) {
    if (!(h.value <= 0.0)) return false;
  }
  return true;
}

FourierTrajectory scaled(const FourierTrajectory& base, double s) {
  FourierTrajectory t = base;
  t.a *= s;
  t.b *= s;
  return t;
}

void check_sampling(const DesignProblem& problem, double omega, int harmonics) {
  if (!(omega > 0.0) || harmonics < 1) {
    throw ValidationError("trajectory needs omega > 0 and at least one harmonic");
  }
  const double highest = omega * harmonics / (2.0 * std::numbers::pi);
  if (!(problem.sample_rate > 2.0 * highest)) {
    throw ValidationError("sample rate does not resolve the highest harmonic");
  }
  if (!(problem.gamma >= 0.0)) throw ValidationError("gamma must be non-negative");
}

// Orthonormal basis of the complement of v.
Eigen::MatrixXd complement(const Eigen::VectorXd& v) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(v.size() - 1);
}

// x = Z z spans every decision vector whose boundary velocities and
// accelerations vanish: Σ_l a_il = 0 and Σ_l l b_il = 0 for each joint.
Eigen::MatrixXd boundary_null_space(int dof, int harmonics) {
  const int L = harmonics;
  Eigen::VectorXd weights(L);
  for (int l = 0; l < L; ++l) weights(l) = l + 1.0;
  const Eigen::MatrixXd Za = complement(Eigen::VectorXd::Ones(L));
  const Eigen::MatrixXd Zb = complement(weights);
  const int r = L - 1;
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(dof * (2 * L + 1), dof * (1 + 2 * r));
  Z.topLeftCorner(dof, dof).setIdentity();
  for (int i = 0; i < dof; ++i) {
    Z.block(dof + i * L, dof + i * r, L, r) = Za;
    Z.block(dof + dof * L + i * L, dof + dof * r + i * r, L, r) = Zb;
  }
  return Z;
}

}  // namespace

std::optional<FourierTrajectory> random_feasible_trajectory(const DesignProblem& problem,
                                                            double omega, int harmonics,
                                                            std::mt19937_64& rng) {
  const RobotModel& model = problem.model;
  const int n = model.dof();
  FourierTrajectory dir = FourierTrajectory::zeros(n, omega, harmonics);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd weights(harmonics);
  for (int l = 0; l < harmonics; ++l) weights(l) = l + 1.0;
  for (int i = 0; i < n; ++i) {
    const JointSpec& j = model.links[i].joint;
    dir.q0(i) = 0.5 * (j.position_lower + j.position_upper);
    for (int l = 0; l < harmonics; ++l) {
      dir.a(i, l) = normal(rng);
      dir.b(i, l) = normal(rng);
    }
    // qd(0) = Σ_l a_il and qdd(0) = ω Σ_l l b_il must vanish.
    Eigen::VectorXd a = dir.a.row(i).transpose();
    Eigen::VectorXd b = dir.b.row(i).transpose();
    if (harmonics > 1) {
      a.array() -= a.mean();
      b -= (b.dot(weights) / weights.squaredNorm()) * weights;
    } else {
      a.setZero();
      b.setZero();
    }
    dir.a.row(i) = a.transpose();
    dir.b.row(i) = b.transpose();
  }
  if (!inequalities_hold(scaled(dir, 0.0), problem)) {
    return std::nullopt;
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; k < 60 && inequalities_hold(scaled(dir, hi), problem); ++k) {
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 40; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (inequalities_hold(scaled(dir, mid), problem)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (lo <= 0.0) return std::nullopt;
  return scaled(dir, lo);
}

DesignResult design_trajectory(const DesignProblem& problem, double omega, int harmonics,
                               const ALOptions& opts) {
  validate(problem.model);
  check_sampling(problem, omega, harmonics);
  const RobotModel& model = problem.model;
  const int n = model.dof();

  const Eigen::MatrixXd basis =
      problem.use_full_regressor
          ? Eigen::MatrixXd()
          : structural_identifiable_basis(model, problem.subspace_threshold, opts.seed);

  FourierTrajectory start = FourierTrajectory::zeros(n, omega, harmonics);
  for (int i = 0; i < n; ++i) {
    const JointSpec& j = model.links[i].joint;
    start.q0(i) = 0.5 * (j.position_lower + j.position_upper);
  }
  std::mt19937_64 rng(opts.seed);
  bool have_start = false;
  for (int attempt = 0; attempt < 20 && !have_start; ++attempt) {
    if (auto t = random_feasible_trajectory(problem, omega, harmonics, rng)) {
      start = *t;
      have_start = true;
    }
  }

  DesignResult out;
  if (!have_start && !inequalities_hold(start, problem)) {
    // Not even the resting trajectory fits the limits: nothing to search.
    out.trajectory = start;
    out.report.initial = trajectory_information(start, problem, basis);
    out.report.final = out.report.initial;
    out.report.constraints = evaluate_constraints(start, problem);
    out.report.rank = static_cast<int>(basis.size() > 0 ? basis.cols() : model.param_count());
    return out;
  }
  // The search runs in the null space of the boundary equalities; they stay
  // in the constraint set and are met to rounding.
  const Eigen::MatrixXd Z = boundary_null_space(n, harmonics);
  const Eigen::VectorXd z0 = Z.transpose() * start.to_vector();
  auto objective = [&](const Eigen::VectorXd& z) {
    return trajectory_information(FourierTrajectory::from_vector(Z * z, n, omega, harmonics),
                                  problem, basis)
        .value;
  };
  auto constraints = [&](const Eigen::VectorXd& z) {
    return evaluate_constraints(FourierTrajectory::from_vector(Z * z, n, omega, harmonics), problem)
        .values();
  };
  RestartSampler sampler = [&](std::mt19937_64& r) -> Eigen::VectorXd {
    if (auto t = random_feasible_trajectory(problem, omega, harmonics, r)) {
      return Z.transpose() * t->to_vector();
    }
    return z0;
  };

  ALOptions options = opts;
  if (options.step_scale.size() != z0.size()) {
    const int r = harmonics - 1;
    options.step_scale.resize(z0.size());
    for (int i = 0; i < n; ++i) {
      const JointSpec& j = model.links[i].joint;
      const double half = 0.5 * (j.position_upper - j.position_lower);
      options.step_scale(i) = half > 0.0 ? half : 1.0;
      options.step_scale.segment(n + i * r, r).setConstant(j.velocity_limit);
      options.step_scale.segment(n + n * r + i * r, r).setConstant(j.velocity_limit);
    }
  }

  const ALResult solved = augmented_lagrangian_minimize(objective, constraints, z0, options, sampler);

  out.trajectory = FourierTrajectory::from_vector(Z * solved.x, n, omega, harmonics);
  out.report.initial = trajectory_information(start, problem, basis);
  out.report.final = trajectory_information(out.trajectory, problem, basis);
  out.report.constraints = evaluate_constraints(out.trajectory, problem);
  out.report.evaluations = solved.evaluations;
  out.report.feasible = solved.feasible;
  out.report.rank = static_cast<int>(basis.size() > 0 ? basis.cols() : model.param_count());
  out.report.history = solved.history;
  return out;
}

}  // namespace physid
