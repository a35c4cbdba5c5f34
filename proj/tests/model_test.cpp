#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "physid/errors.hpp"
#include "physid/model.hpp"
#include "physid/simulate.hpp"
#include "physid/urdf.hpp"
#include "test_util.hpp"

namespace physid {
namespace {

using testing::pendulum_urdf;
using testing::random_body;

double min_eig(const Eigen::Matrix4d& J) {
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(J).eigenvalues().minCoeff();
}

TEST(ParseRobotDescription, PendulumInertiaMovesToJointOrigin) {
  const RobotModel m = parse_robot_description(pendulum_urdf());
  ASSERT_EQ(m.dof(), 1);
  const LinkInertialParams& p = m.links[0].params;
  // Parallel axis by hand: I_xx = 0.1 + m·(0.5)², I_zz unchanged.
  EXPECT_NEAR(p.inertia(0, 0), 0.35, 1e-12);
  EXPECT_NEAR(p.inertia(1, 1), 0.35, 1e-12);
  EXPECT_NEAR(p.inertia(2, 2), 0.01, 1e-12);
  EXPECT_NEAR(p.first_moment.z(), -0.5, 1e-15);
  EXPECT_EQ(m.links[0].joint.name, "shoulder");
  EXPECT_DOUBLE_EQ(m.links[0].joint.acceleration_limit, 10.0);
}

TEST(ParseRobotDescription, MissingVelocityLimitNamesTheJoint) {
  try {
    parse_robot_description(pendulum_urdf(false));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("shoulder"), std::string::npos);
  }
}

TEST(ParseRobotDescription, MalformedXmlReportsLine) {
  std::string text = pendulum_urdf();
  text.replace(text.find("<axis xyz=\"0 1 0\"/>"), 19, "<axis xyz=\"0 1 0/>");
  try {
    parse_robot_description(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 0);
  }
}

TEST(ParseRobotDescription, RejectsBranchingAndPrismatic) {
  std::string branch = pendulum_urdf();
  branch.replace(branch.find("</robot>"), 8, R"(<link name="other"><inertial><mass value="1"/>
    <inertia ixx="1" ixy="0" ixz="0" iyy="1" iyz="0" izz="1"/></inertial></link>
  <joint name="side" type="revolute"><parent link="base"/><child link="other"/>
    <limit lower="-1" upper="1" velocity="1" acceleration="1"/></joint>
</robot>)");
  EXPECT_THROW(parse_robot_description(branch), UnsupportedTopologyError);

  std::string prismatic = pendulum_urdf();
  prismatic.replace(prismatic.find("revolute"), 8, "prismatic");
  EXPECT_THROW(parse_robot_description(prismatic), UnsupportedTopologyError);
}

TEST(ParseRobotDescription, PlanarFixtureHas26Parameters) {
  const RobotModel m = parse_robot_description(to_robot_description(builtin_fixture("planar2").model));
  EXPECT_EQ(m.dof(), 2);
  EXPECT_EQ(pack_params(m).size(), 26);
}

TEST(ParseRobotDescription, ComFrameValuesSurviveConversion) {
  const RobotModel m = parse_robot_description(pendulum_urdf());
  const Eigen::Matrix3d Ic = m.links[0].params.inertia_about_com();
  const Eigen::Matrix3d expected = Eigen::Vector3d(0.1, 0.1, 0.01).asDiagonal();
  EXPECT_LT((Ic - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((m.links[0].params.com() - Eigen::Vector3d(0, 0, -0.5)).norm(), 1e-12);
}

TEST(ParseRobotDescription, WriterRoundTripsEveryFixture) {
  for (const std::string& name : builtin_fixture_names()) {
    const RobotModel a = builtin_fixture(name).model;
    const RobotModel b = parse_robot_description(to_robot_description(a));
    ASSERT_EQ(a.dof(), b.dof()) << name;
    EXPECT_LT((pack_params(a).values - pack_params(b).values).cwiseAbs().maxCoeff(), 1e-12) << name;
    for (int i = 0; i < a.dof(); ++i) {
      EXPECT_LT((a.links[i].joint.parent_frame_pose.matrix() -
                 b.links[i].joint.parent_frame_pose.matrix())
                    .cwiseAbs()
                    .maxCoeff(),
                1e-12);
    }
  }
}

TEST(PackParams, SingleMassEntry) {
  RobotModel m = parse_robot_description(pendulum_urdf());
  m.links[0].params = LinkInertialParams{};
  m.links[0].params.mass = 2.0;
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(13);
  expected(0) = 2.0;
  EXPECT_EQ(pack_params(m).values, expected);
}

TEST(PackParams, LengthIs13PerLink) { EXPECT_EQ(pack_params(builtin_fixture("chain3").model).size(), 39); }

TEST(PackParams, PackUnpackRoundTrip) {
  const RobotModel m = builtin_fixture("chain3").model;
  const RobotModel back = unpack_params(pack_params(m), m);
  EXPECT_EQ(pack_params(back).values, pack_params(m).values);
  EXPECT_EQ(back.links[2].joint.name, m.links[2].joint.name);
}

TEST(UnpackParams, RandomVectorRoundTrip) {
  const RobotModel skel = builtin_fixture("arm7").model;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    ParamVector v = ParamVector::zeros(skel.dof());
    for (int k = 0; k < v.size(); ++k) v.values(k) = n(rng);
    // Symmetric storage: only the six packed entries carry the tensor.
    EXPECT_EQ(pack_params(unpack_params(v, skel)).values, v.values);
  }
}

TEST(UnpackParams, ZeroVectorAndLengthMismatch) {
  const RobotModel skel = parse_robot_description(pendulum_urdf());
  const RobotModel z = unpack_params(ParamVector::zeros(1), skel);
  EXPECT_EQ(z.links[0].params.mass, 0.0);
  EXPECT_TRUE(z.links[0].params.inertia.isZero());
  EXPECT_THROW(unpack_params(ParamVector(Eigen::VectorXd::Zero(12)), skel), DimensionError);
}

TEST(PseudoInertia, PointMass) {
  const LinkInertialParams p = LinkInertialParams::from_com_frame(2.0, {1, 0, 0}, Eigen::Matrix3d::Zero());
  EXPECT_LT((p.inertia - Eigen::Vector3d(0, 2, 2).asDiagonal().toDenseMatrix()).norm(), 1e-15);
  const Eigen::Matrix4d J = pseudo_inertia(p);
  Eigen::Matrix4d expected = Eigen::Matrix4d::Zero();
  expected(0, 0) = 2;
  expected(0, 3) = expected(3, 0) = 2;
  expected(3, 3) = 2;
  EXPECT_LT((J - expected).norm(), 1e-15);
  Eigen::FullPivLU<Eigen::Matrix4d> lu(J);
  EXPECT_EQ(lu.rank(), 1);
  EXPECT_GT(min_eig(J), -1e-12);
}

TEST(PseudoInertia, SolidSphere) {
  const double r = 1.0, m = 1.0;
  const LinkInertialParams p = LinkInertialParams::from_com_frame(
      m, Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity() * (2.0 / 5.0) * m * r * r);
  const Eigen::Matrix4d J = pseudo_inertia(p);
  EXPECT_LT((J - Eigen::Vector4d(0.2, 0.2, 0.2, 1.0).asDiagonal().toDenseMatrix()).norm(), 1e-15);
  EXPECT_NEAR(min_eig(J), 0.2, 1e-15);
}

TEST(PseudoInertia, ZeroBody) { EXPECT_TRUE(pseudo_inertia(LinkInertialParams{}).isZero()); }

TEST(PseudoInertia, InverseMapRecoversInertials) {
  std::mt19937_64 rng(2);
  const LinkInertialParams p = random_body(rng);
  const LinkInertialParams q = from_pseudo_inertia(pseudo_inertia(p));
  EXPECT_NEAR(q.mass, p.mass, 1e-14);
  EXPECT_LT((q.first_moment - p.first_moment).norm(), 1e-14);
  EXPECT_LT((q.inertia - p.inertia).norm(), 1e-14);
}

TEST(Feasibility, SphereIsFeasibleWithMargin) {
  const LinkInertialParams p = LinkInertialParams::from_com_frame(
      1.0, Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity() * 0.4);
  const FeasibilityReport r = is_physically_feasible(p, 1e-9);
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.margin, 0.2, 1e-12);
  EXPECT_EQ(r.binding, "pseudo_inertia");
}

TEST(Feasibility, PointMassIsOnTheBoundary) {
  const LinkInertialParams p = LinkInertialParams::from_com_frame(2.0, {1, 0, 0}, Eigen::Matrix3d::Zero());
  EXPECT_FALSE(is_physically_feasible(p, 1e-9).feasible);
}

TEST(Feasibility, NegativeCoulombFrictionBinds) {
  LinkInertialParams p = LinkInertialParams::from_com_frame(1.0, Eigen::Vector3d::Zero(),
                                                            Eigen::Matrix3d::Identity() * 0.4);
  p.coulomb_friction = -0.1;
  const FeasibilityReport r = is_physically_feasible(p, 1e-9);
  EXPECT_FALSE(r.feasible);
  EXPECT_DOUBLE_EQ(r.margin, -0.1);
  EXPECT_EQ(r.binding, "coulomb_friction");
}

TEST(ModelProperties, PseudoInertiaIsLinear) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(0.0, 3.0);
  for (int k = 0; k < 50; ++k) {
    const LinkInertialParams p1 = random_body(rng), p2 = random_body(rng);
    const double a = w(rng), b = w(rng);
    const Eigen::VectorXd mix = a * pack_link(p1) + b * pack_link(p2);
    const Eigen::Matrix4d lhs = pseudo_inertia(Eigen::Ref<const Eigen::VectorXd>(mix));
    const Eigen::Matrix4d rhs = a * pseudo_inertia(p1) + b * pseudo_inertia(p2);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ModelProperties, FeasibleSetClosedUnderLumping) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 100; ++k) {
    const LinkInertialParams p1 = random_body(rng), p2 = random_body(rng);
    ASSERT_TRUE(is_physically_feasible(p1).feasible);
    ASSERT_TRUE(is_physically_feasible(p2).feasible);
    EXPECT_TRUE(is_physically_feasible(lump(p1, p2)).feasible);
  }
}

TEST(ModelProperties, UnpackPackIdentityOnModels) {
  std::mt19937_64 rng(13);
  RobotModel m = builtin_fixture("chain3").model;
  for (Link& l : m.links) l.params = random_body(rng);
  const RobotModel back = unpack_params(pack_params(m), m);
  for (int i = 0; i < m.dof(); ++i) {
    EXPECT_EQ(pack_link(back.links[i].params), pack_link(m.links[i].params));
  }
}

TEST(Validate, RejectsBadJointSpecs) {
  RobotModel m = parse_robot_description(pendulum_urdf());
  RobotModel bad = m;
  bad.links[0].joint.axis = Eigen::Vector3d(0, 2, 0);
  EXPECT_THROW(validate(bad), ValidationError);
  bad = m;
  bad.links[0].joint.velocity_limit = 0.0;
  EXPECT_THROW(validate(bad), ValidationError);
  bad = m;
  bad.links[0].joint.position_lower = 4.0;
  EXPECT_THROW(validate(bad), ValidationError);
  bad = m;
  bad.links[0].params.inertia(0, 1) += 1e-6;
  EXPECT_THROW(validate(bad), ValidationError);
  EXPECT_NO_THROW(validate(m));
}

}  // namespace
}  // namespace physid
