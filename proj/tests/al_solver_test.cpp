#include <cmath>

#include <gtest/gtest.h>

#include "physid/al_solver.hpp"

namespace physid {
namespace {

ConstraintFn none() {
  return [](const Eigen::VectorXd&) { return ConstraintValues{}; };
}

TEST(AugmentedLagrangian, SquareAboveOne) {
  auto f = [](const Eigen::VectorXd& x) { return x(0) * x(0); };
  auto h = [](const Eigen::VectorXd& x) { return ConstraintValues{{}, {1.0 - x(0)}}; };
  const ALResult r = augmented_lagrangian_minimize(f, h, Eigen::VectorXd::Constant(1, 3.0), ALOptions{});
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.x(0), 1.0, 1e-3);
}

TEST(AugmentedLagrangian, LineConstrainedQuadratic) {
  auto f = [](const Eigen::VectorXd& x) { return std::pow(x(0) - 2.0, 2) + std::pow(x(1) - 1.0, 2); };
  auto c = [](const Eigen::VectorXd& x) { return ConstraintValues{{x(0) + x(1) - 1.0}, {}}; };
  const ALResult r = augmented_lagrangian_minimize(f, c, Eigen::Vector2d(0.0, 0.0), ALOptions{});
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.x(0), 1.0, 1e-3);
  EXPECT_NEAR(r.x(1), 0.0, 1e-3);
}

TEST(AugmentedLagrangian, UnconstrainedQuadraticInFiveDimensions) {
  const Eigen::VectorXd target = (Eigen::VectorXd(5) << 1.0, -2.0, 0.5, 3.0, -1.5).finished();
  const Eigen::VectorXd weights = (Eigen::VectorXd(5) << 1.0, 2.0, 3.0, 4.0, 5.0).finished();
  auto f = [&](const Eigen::VectorXd& x) { return (weights.array() * (x - target).array().square()).sum(); };
  ALOptions opts;
  opts.outer_iterations = 2;
  opts.subproblem_budget = 800;
  opts.restarts = 1;
  const ALResult r = augmented_lagrangian_minimize(f, none(), Eigen::VectorXd::Zero(5), opts);
  EXPECT_LT((r.x - target).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_LT(r.evaluations, 5000);
}

TEST(AugmentedLagrangian, UnreachableConstraintIsFlagged) {
  auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  // x² ≤ −1 has no solution.
  auto h = [](const Eigen::VectorXd& x) { return ConstraintValues{{}, {x(0) * x(0) + 1.0}}; };
  ALOptions opts;
  opts.outer_iterations = 4;
  opts.subproblem_budget = 200;
  const ALResult r = augmented_lagrangian_minimize(f, h, Eigen::VectorXd::Constant(1, 0.5), opts);
  EXPECT_FALSE(r.feasible);
  EXPECT_NEAR(r.infeasibility, 1.0, 1e-3);
  EXPECT_FALSE(r.history.empty());
}

TEST(AugmentedLagrangian, RejectsBadOptions) {
  auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  ALOptions opts;
  opts.penalty_growth = 1.0;
  EXPECT_ANY_THROW(augmented_lagrangian_minimize(f, none(), Eigen::VectorXd::Zero(1), opts));
  opts = ALOptions{};
  opts.subproblem_budget = 0;
  EXPECT_ANY_THROW(augmented_lagrangian_minimize(f, none(), Eigen::VectorXd::Zero(1), opts));
}

TEST(AugmentedLagrangian, NonFiniteObjectiveRankedWorst) {
  auto f = [](const Eigen::VectorXd& x) {
    return x(0) < 0.5 ? std::numeric_limits<double>::infinity() : std::pow(x(0) - 1.0, 2);
  };
  const ALResult r = augmented_lagrangian_minimize(f, none(), Eigen::VectorXd::Constant(1, 2.0), ALOptions{});
  EXPECT_NEAR(r.x(0), 1.0, 1e-4);
}

TEST(NelderMead, Rosenbrock) {
  auto f = [](const Eigen::VectorXd& x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
  };
  long evals = 0;
  const Eigen::VectorXd x = nelder_mead(f, Eigen::Vector2d(-1.2, 1.0), Eigen::Vector2d(0.1, 0.1), 4000, &evals);
  EXPECT_NEAR(x(0), 1.0, 1e-4);
  EXPECT_NEAR(x(1), 1.0, 1e-4);
  EXPECT_LE(evals, 4000);
}

TEST(ConstraintValues, Infeasibility) {
  EXPECT_EQ(ConstraintValues{}.infeasibility(), 0.0);
  EXPECT_EQ((ConstraintValues{{-0.3}, {-2.0, 0.1}}).infeasibility(), 0.3);
  EXPECT_EQ((ConstraintValues{{}, {-2.0}}).infeasibility(), 0.0);
}

TEST(AlSolverProperties, SameSeedSameResultBitForBit) {
  auto f = [](const Eigen::VectorXd& x) {
    return std::sin(3.0 * x(0)) + std::cos(2.0 * x(1)) + 0.1 * x.squaredNorm();
  };
  auto h = [](const Eigen::VectorXd& x) { return ConstraintValues{{x(2) - 0.5 * x(0)}, {x(1) - 1.0}}; };
  ALOptions opts;
  opts.seed = 1234;
  opts.outer_iterations = 5;
  opts.subproblem_budget = 300;
  opts.restarts = 3;
  const ALResult a = augmented_lagrangian_minimize(f, h, Eigen::Vector3d(0.2, 0.1, 0.0), opts);
  const ALResult b = augmented_lagrangian_minimize(f, h, Eigen::Vector3d(0.2, 0.1, 0.0), opts);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.evaluations, b.evaluations);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t k = 0; k < a.history.size(); ++k) EXPECT_EQ(a.history[k].lagrangian, b.history[k].lagrangian);
}

TEST(AlSolverProperties, SamplerReceivesSeededGenerator) {
  auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  std::vector<double> draws_a, draws_b;
  auto run = [&](std::vector<double>& draws) {
    RestartSampler s = [&](std::mt19937_64& rng) {
      const double d = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      draws.push_back(d);
      return Eigen::VectorXd::Constant(2, d);
    };
    ALOptions opts;
    opts.seed = 77;
    opts.outer_iterations = 2;
    opts.subproblem_budget = 100;
    augmented_lagrangian_minimize(f, none(), Eigen::Vector2d(1.0, 1.0), opts, s);
  };
  run(draws_a);
  run(draws_b);
  EXPECT_FALSE(draws_a.empty());
  EXPECT_EQ(draws_a, draws_b);
}

TEST(Splitmix64, DistinctAndStable) {
  EXPECT_EQ(splitmix64(0), splitmix64(0));
  EXPECT_NE(splitmix64(0), splitmix64(1));
}

}  // namespace
}  // namespace physid
