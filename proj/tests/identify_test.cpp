#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "physid/errors.hpp"
#include "physid/excite.hpp"
#include "physid/identify.hpp"
#include "physid/simulate.hpp"
#include "test_util.hpp"

namespace physid {
namespace {

FourierTrajectory exciting_trajectory(const RobotModel& m, std::uint64_t seed) {
  DesignProblem p;
  p.model = m;
  std::mt19937_64 rng(seed);
  return *random_feasible_trajectory(p, kDefaultBaseFrequency, 5, rng);
}

// Exact states along a trajectory with torques from `truth`, plus Gaussian noise.
struct Samples {
  std::vector<JointState> states;
  std::vector<Eigen::VectorXd> torques;
};

Samples sample(const RobotModel& truth, const FourierTrajectory& traj, double noise_std,
               std::uint64_t seed) {
  Samples s;
  s.states = sample_trajectory(traj, 100.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const JointState& st : s.states) {
    Eigen::VectorXd tau = inverse_dynamics(truth, st);
    for (int i = 0; i < tau.size(); ++i) tau(i) += noise_std * g(rng);
    s.torques.push_back(tau);
  }
  return s;
}

RegressorStack full_stack(const RobotModel& truth, double noise_std, std::uint64_t seed) {
  const Samples s = sample(truth, exciting_trajectory(truth, seed), noise_std, seed + 1);
  return stack_regressor(truth, s.states, s.torques);
}

double fit(const RegressorStack& st, const Eigen::VectorXd& alpha) {
  return (st.W * alpha + st.w0 - st.T).squaredNorm();
}

bool all_feasible(const ParamVector& a) {
  for (int i = 0; i < a.dof(); ++i) {
    if (!is_physically_feasible(a.link(i), 0.0).feasible) return false;
  }
  return true;
}

TEST(IdentifiableSubspace, IdentityWithZeroColumn) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(3, 4);
  W.leftCols(3).setIdentity();
  const SubspaceReport s = identifiable_subspace(W);
  EXPECT_EQ(s.rank, 3);
  ASSERT_EQ(s.unidentifiable_basis.cols(), 1);
  EXPECT_NEAR(std::abs(s.unidentifiable_basis(3, 0)), 1.0, 1e-12);
  EXPECT_LT((s.identifiable_basis.transpose() * s.unidentifiable_basis).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(IdentifiableSubspace, DuplicateColumnsLoseRank) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Random(20, 4);
  W.col(3) = W.col(1);
  EXPECT_EQ(identifiable_subspace(W).rank, 3);
  EXPECT_THROW(identifiable_subspace(Eigen::MatrixXd()), ValidationError);
}

TEST(IdentifiableSubspace, PendulumRankIsStable) {
  // About a single y axis only h_x, h_z, I_yy + I_r, μ_v and μ_c reach the torque.
  const RobotModel m = builtin_fixture("pendulum1").model;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EXPECT_EQ(identifiable_subspace(full_stack(m, 0.0, seed).W).rank, 5) << seed;
  }
}

TEST(OlsIdentify, TwoEquationAverage) {
  RegressorStack st;
  st.W = Eigen::MatrixXd::Ones(2, 1);
  st.T = Eigen::Vector2d(1.0, 3.0);
  st.w0 = Eigen::VectorXd::Zero(2);
  st.free_indices = {0};
  st.fixed_values = Eigen::VectorXd::Zero(1);
  const IdentificationResult r = ols_identify(st);
  EXPECT_NEAR(r.alpha_hat.values(0), 2.0, 1e-14);
  EXPECT_NEAR(r.residual, 2.0, 1e-13);
}

TEST(OlsIdentify, NoiselessRoundTripOnIdentifiableSubspace) {
  const RobotModel m = builtin_fixture("chain3").model;
  const RegressorStack st = full_stack(m, 0.0, 3);
  const IdentificationResult r = ols_identify(st);
  const Eigen::MatrixXd P = r.subspace.identifiable_projector();
  const Eigen::VectorXd truth = P * pack_params(m).values;
  EXPECT_LT((P * r.alpha_hat.values - truth).norm(), 1e-8 * truth.norm());
}

TEST(OlsIdentify, EmptyStackThrows) { EXPECT_THROW(ols_identify(RegressorStack{}), ValidationError); }

TEST(ConsistentIdentify, MatchesOlsWhenOlsIsInterior) {
  const RobotModel m = builtin_fixture("chain3").model;
  const ParamVector prior = pack_params(m);
  const RegressorStack st = full_stack(m, 1e-3, 4);
  const IdentificationResult ols = ols_identify(st, prior);
  ASSERT_TRUE(all_feasible(ols.alpha_hat));
  const IdentificationResult con = consistent_identify(st, prior);
  EXPECT_TRUE(con.converged);
  EXPECT_LT((con.alpha_hat.values - ols.alpha_hat.values).norm(), 1e-6 * ols.alpha_hat.values.norm());
}

TEST(ConsistentIdentify, RepairsTinyLinkUnderNoise) {
  RobotModel m = builtin_fixture("chain3").model;
  LinkInertialParams& tip = m.links[2].params;
  tip = LinkInertialParams::from_com_frame(1e-3, tip.com(), 1e-3 * tip.inertia_about_com() / tip.mass);
  const RegressorStack st = full_stack(m, 0.05, 5);
  const ParamVector prior = interior_prior(m);
  const IdentificationResult ols = ols_identify(st, prior);
  ASSERT_FALSE(all_feasible(ols.alpha_hat));
  const IdentificationResult con = consistent_identify(st, prior, 0.0);
  EXPECT_TRUE(all_feasible(con.alpha_hat));
  for (int i = 0; i < 3; ++i) {
    EXPECT_GT(con.alpha_hat.link(i).mass, 0.0);
    EXPECT_TRUE(con.feasibility[i].feasible);
  }
  EXPECT_GE(con.residual, ols.residual);
}

TEST(ConsistentIdentify, BarrierPathObjectiveNeverIncreases) {
  const RobotModel m = builtin_fixture("planar2").model;
  const RegressorStack st = full_stack(m, 0.02, 6);
  const IdentificationResult con = consistent_identify(st, interior_prior(m));
  ASSERT_GT(con.trace.size(), 2u);
  for (std::size_t k = 1; k < con.trace.size(); ++k) {
    EXPECT_LT(con.trace[k].mu, con.trace[k - 1].mu);
    EXPECT_LE(con.trace[k].objective, con.trace[k - 1].objective * (1.0 + 1e-12) + 1e-12);
  }
}

TEST(ConsistentIdentify, InfeasiblePriorThrows) {
  const RobotModel m = builtin_fixture("planar2").model;
  const RegressorStack st = full_stack(m, 0.0, 7);
  EXPECT_THROW(consistent_identify(st, ParamVector::zeros(2)), ValidationError);
}

TEST(InteriorPrior, StrictlyFeasibleEvenFromZeros) {
  for (const std::string& name : builtin_fixture_names()) {
    RobotModel m = builtin_fixture(name).model;
    EXPECT_TRUE(all_feasible(interior_prior(m))) << name;
    for (Link& l : m.links) l.params = LinkInertialParams{};
    const ParamVector p = interior_prior(m);
    for (int i = 0; i < m.dof(); ++i) {
      const FeasibilityReport r = is_physically_feasible(p.link(i), 0.0);
      EXPECT_TRUE(r.feasible && r.min_friction > 0.0) << name;
    }
  }
}

class PayloadTest : public ::testing::Test {
 protected:
  PayloadResult identify_object(const LinkInertialParams& object, double noise, std::uint64_t seed) {
    const RobotModel loaded = attach_payload(base, object);
    const Samples s = sample(loaded, exciting_trajectory(base, 30), noise, seed);
    const ParamVector alpha = pack_params(base);
    const RegressorStack st =
        stack_regressor(base, s.states, s.torques, payload_fixed_mask(base.dof(), base.dof() - 1), alpha);
    return payload_identify(st, alpha, base.dof() - 1);
  }

  RobotModel base = builtin_fixture("chain3").model;
};

TEST_F(PayloadTest, NoiselessSphereMassRecovered) {
  const double m = 0.5, r = 0.05;
  const LinkInertialParams sphere = LinkInertialParams::from_com_frame(
      m, Eigen::Vector3d(0.1, 0.0, 0.0), (2.0 / 5.0) * m * r * r * Eigen::Matrix3d::Identity());
  const PayloadResult res = identify_object(sphere, 0.0, 1);
  EXPECT_NEAR(res.p.mass, 0.5, 0.5e-6);
  EXPECT_LT((res.p.com() - Eigen::Vector3d(0.1, 0, 0)).norm(), 1e-6);
  EXPECT_FALSE(res.boundary_warning);
  EXPECT_GT(res.min_eigenvalue, 0.0);
  EXPECT_GT(res.composite_min_eigenvalue, 0.0);
}

TEST_F(PayloadTest, EmptyGripperNeverYieldsNegativeMass) {
  bool unconstrained_went_negative = false;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const PayloadResult res = identify_object(LinkInertialParams{}, 0.05, seed);
    EXPECT_GE(res.p.mass, 0.0) << seed;
    EXPECT_GE(res.min_eigenvalue, 0.0) << seed;
    unconstrained_went_negative |= res.unconstrained_difference.mass < 0.0;
  }
  EXPECT_TRUE(unconstrained_went_negative);
}

TEST_F(PayloadTest, CompositeMinusKnownBodyRecoversTheOther) {
  std::mt19937_64 rng(8);
  const LinkInertialParams a = testing::random_body(rng);
  const LinkInertialParams b = testing::random_body(rng);
  // Attach a first, treat that as the base, then identify b on top of it.
  base = attach_payload(base, a);
  const PayloadResult res = identify_object(b, 0.0, 2);
  const auto pa = pack_link(res.p).head<kInertialParamsPerLink>();
  const auto pb = pack_link(b).head<kInertialParamsPerLink>();
  EXPECT_LT((pa - pb).norm(), 1e-6 * pb.norm());
  // Lumped parameters add entry by entry.
  const LinkInertialParams sum = lump(a, b);
  EXPECT_NEAR(sum.mass, a.mass + b.mass, 1e-15);
  EXPECT_LT((sum.first_moment - a.first_moment - b.first_moment).norm(), 1e-15);
  EXPECT_LT((sum.inertia - a.inertia - b.inertia).norm(), 1e-15);
}

TEST_F(PayloadTest, WrongStackLayoutThrows) {
  const Samples s = sample(base, exciting_trajectory(base, 30), 0.0, 3);
  const RegressorStack st = stack_regressor(base, s.states, s.torques);
  EXPECT_THROW(payload_identify(st, pack_params(base), 2), ValidationError);
}

TEST(ErrorMetrics, ExactAndMassOnly) {
  const LinkInertialParams truth =
      LinkInertialParams::from_com_frame(1.0, Eigen::Vector3d(0, 0, 0.1), Eigen::Matrix3d::Identity() * 0.01);
  const ErrorMetrics zero = error_metrics(truth, truth, 0.1);
  EXPECT_NEAR(zero.mass_pct, 0.0, 1e-12);
  EXPECT_NEAR(zero.com_pct, 0.0, 1e-12);
  EXPECT_NEAR(zero.inertia_pct, 0.0, 1e-10);
  const LinkInertialParams lighter =
      LinkInertialParams::from_com_frame(0.9, Eigen::Vector3d(0, 0, 0.1), Eigen::Matrix3d::Identity() * 0.01);
  EXPECT_NEAR(error_metrics(lighter, truth, 0.1).mass_pct, 10.0, 1e-10);
}

TEST(ErrorMetrics, HandComputedPerturbation) {
  const Eigen::Matrix3d I = Eigen::Vector3d(0.02, 0.03, 0.04).asDiagonal();
  const LinkInertialParams truth = LinkInertialParams::from_com_frame(2.0, Eigen::Vector3d(0.1, 0, 0.2), I);
  // CoM off by a 3-4-5 triangle of 5 mm; inertia scaled by 1.1.
  const LinkInertialParams est =
      LinkInertialParams::from_com_frame(2.1, Eigen::Vector3d(0.103, 0.004, 0.2), 1.1 * I);
  const ErrorMetrics e = error_metrics(est, truth, 0.05);
  EXPECT_NEAR(e.mass_pct, 5.0, 1e-9);
  EXPECT_NEAR(e.com_pct, 10.0, 1e-9);
  EXPECT_NEAR(e.inertia_pct, 10.0, 1e-9);
  EXPECT_THROW(error_metrics(est, truth, 0.0), ValidationError);
  EXPECT_THROW(error_metrics(est, LinkInertialParams{}, 0.1), ValidationError);
}

TEST(ExpressInFrame, TranslationRoundTrip) {
  std::mt19937_64 rng(9);
  const LinkInertialParams p = testing::random_body(rng);
  Eigen::Isometry3d f = Eigen::Isometry3d::Identity();
  f.translate(Eigen::Vector3d(0.1, -0.2, 0.3));
  f.rotate(Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()));
  const LinkInertialParams q = express_in_frame(p, f);
  EXPECT_NEAR(q.mass, p.mass, 1e-14);
  EXPECT_LT((f * q.com() - p.com()).norm(), 1e-12);
  const LinkInertialParams back = express_in_frame(q, f.inverse());
  EXPECT_LT((back.inertia - p.inertia).norm(), 1e-12);
  EXPECT_LT((back.first_moment - p.first_moment).norm(), 1e-12);
}

TEST(SelectBaseParams, NearestLabelFirstOnTies) {
  const std::vector<BaseParamSet> sets{{0.0, ParamVector::zeros(1)}, {0.04, ParamVector::zeros(1)},
                                       {0.08, ParamVector::zeros(1)}};
  EXPECT_EQ(&select_base_params(sets, 0.05), &sets[1]);
  EXPECT_EQ(&select_base_params(sets, 0.02), &sets[0]);
  EXPECT_EQ(&select_base_params(sets, 1.0), &sets[2]);
  EXPECT_THROW(select_base_params({}, 0.0), ValidationError);
}

TEST(IdentifyProperties, ConsistentOutputAlwaysFeasible) {
  for (const std::string& name : {"pendulum1", "planar2", "chain3"}) {
    const RobotModel m = builtin_fixture(name).model;
    for (std::uint64_t seed = 10; seed < 13; ++seed) {
      const IdentificationResult r = consistent_identify(full_stack(m, 0.1, seed), interior_prior(m));
      EXPECT_TRUE(all_feasible(r.alpha_hat)) << name << " " << seed;
    }
  }
}

TEST(IdentifyProperties, FitObjectiveIsConvex) {
  const RobotModel m = builtin_fixture("chain3").model;
  const RegressorStack st = full_stack(m, 0.05, 14);
  std::mt19937_64 rng(15);
  for (int k = 0; k < 20; ++k) {
    ParamVector a1 = ParamVector::zeros(3), a2 = ParamVector::zeros(3);
    for (int i = 0; i < 3; ++i) {
      a1.set_link(i, testing::random_body(rng));
      a2.set_link(i, testing::random_body(rng));
    }
    const double mid = fit(st, 0.5 * (a1.values + a2.values));
    EXPECT_LE(mid, 0.5 * (fit(st, a1.values) + fit(st, a2.values)) + 1e-12);
  }
}

TEST(IdentifyProperties, ResidualOrdering) {
  for (const std::string& name : {"planar2", "chain3"}) {
    RobotModel m = builtin_fixture(name).model;
    m.links.back().params.mass *= 1e-3;
    m.links.back().params.first_moment *= 1e-3;
    m.links.back().params.inertia *= 1e-3;
    const RegressorStack st = full_stack(m, 0.05, 16);
    const ParamVector prior = interior_prior(m);
    const double ols = ols_identify(st, prior).residual;
    const double con = consistent_identify(st, prior, 0.0).residual;
    const double reg = consistent_identify(st, prior, 1e3).residual;
    EXPECT_LE(ols, con * (1.0 + 1e-9)) << name;
    EXPECT_LE(con, reg * (1.0 + 1e-9)) << name;
  }
}

TEST(IdentifyProperties, UnidentifiableDirectionsLeaveTorquesAlone) {
  const RobotModel m = builtin_fixture("chain3").model;
  const RegressorStack st = full_stack(m, 0.0, 17);
  const SubspaceReport s = identifiable_subspace(st.W);
  const Eigen::VectorXd alpha = pack_params(m).values;
  const double base = (st.W * alpha).norm();
  std::mt19937_64 rng(18);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int c = 0; c < s.unidentifiable_basis.cols(); ++c) {
    const double scale = 10.0 * g(rng);
    const Eigen::VectorXd delta = scale * s.unidentifiable_basis.col(c);
    EXPECT_LT(std::abs((st.W * (alpha + delta)).norm() - base),
              s.threshold * s.singular_values(0) * delta.norm() + 1e-12);
  }
}

}  // namespace
}  // namespace physid
