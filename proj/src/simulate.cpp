#include "physid/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "physid/dynamics.hpp"
#include "physid/errors.hpp"

namespace physid {

namespace {

struct JointRow {
  const char* name;
  Eigen::Vector3d axis;
  Eigen::Vector3d origin;
  double limit;
  double velocity;
  double acceleration;
};

struct BodyRow {
  double mass;
  Eigen::Vector3d com;
  Eigen::Vector3d principal;  // principal moments about the CoM
  Eigen::Vector3d rpy;        // principal axes orientation
  double viscous;
  double coulomb;
  double rotor;
};

Eigen::Matrix3d rotation_rpy(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

LinkInertialParams make_body(const BodyRow& b) {
  const Eigen::Matrix3d R = rotation_rpy(b.rpy);
  LinkInertialParams p =
      LinkInertialParams::from_com_frame(b.mass, b.com, R * b.principal.asDiagonal() * R.transpose());
  p.viscous_friction = b.viscous;
  p.coulomb_friction = b.coulomb;
  p.rotor_inertia = b.rotor;
  return p;
}

RobotModel make_chain(const std::string& name, const std::vector<JointRow>& joints,
                      const std::vector<BodyRow>& bodies) {
  RobotModel m;
  m.name = name;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    Link link;
    link.link_name = std::string("link") + std::to_string(i + 1);
    link.joint.name = joints[i].name;
    link.joint.axis = joints[i].axis;
    link.joint.parent_frame_pose = Eigen::Isometry3d::Identity();
    link.joint.parent_frame_pose.translation() = joints[i].origin;
    link.joint.position_lower = -joints[i].limit;
    link.joint.position_upper = joints[i].limit;
    link.joint.velocity_limit = joints[i].velocity;
    link.joint.acceleration_limit = joints[i].acceleration;
    link.params = make_body(bodies[i]);
    m.links.push_back(link);
  }
  validate(m);
  return m;
}

// Solid box of the given edge lengths.
Eigen::Vector3d box_moments(double mass, double x, double y, double z) {
  return mass / 12.0 * Eigen::Vector3d(y * y + z * z, x * x + z * z, x * x + y * y);
}

Fixture pendulum1() {
  Fixture f;
  f.name = "pendulum1";
  f.model = make_chain("pendulum1", {{"joint1", Eigen::Vector3d::UnitY(), {0, 0, 0}, 3.0, 3.0, 12.0}},
                       {{1.0, {0, 0, -0.5}, {0.1, 0.1, 0.01}, {0, 0, 0}, 0.05, 0.02, 0.005}});
  f.char_length = 0.5;
  return f;
}

Fixture planar2() {
  Fixture f;
  f.name = "planar2";
  const Eigen::Vector3d y = Eigen::Vector3d::UnitY();
  f.model = make_chain("planar2",
                       {{"joint1", y, {0, 0, 0}, 2.5, 2.0, 8.0},
                        {"joint2", y, {0.5, 0, 0}, 2.5, 2.0, 8.0}},
                       {{1.5, {0.25, 0, 0.01}, box_moments(1.5, 0.5, 0.05, 0.05), {0, 0, 0}, 0.08,
                         0.04, 0.01},
                        {0.9, {0.2, 0, 0}, box_moments(0.9, 0.4, 0.04, 0.04), {0, 0, 0}, 0.06,
                         0.03, 0.008}});
  f.char_length = 0.4;
  return f;
}

Fixture chain3() {
  Fixture f;
  f.name = "chain3";
  const Eigen::Vector3d y = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  f.model = make_chain("chain3",
                       {{"joint1", z, {0, 0, 0.1}, 2.5, 2.0, 8.0},
                        {"joint2", y, {0, 0, 0.3}, 2.5, 2.0, 8.0},
                        {"joint3", y, {0.02, 0.05, 0.4}, 2.5, 2.0, 8.0}},
                       {{2.0, {0.01, -0.02, 0.15}, {0.018, 0.016, 0.006}, {0.1, -0.05, 0.2}, 0.1,
                         0.05, 0.02},
                        {1.4, {0.03, 0.01, 0.2}, {0.02, 0.021, 0.004}, {-0.15, 0.1, 0.05}, 0.08,
                         0.04, 0.015},
                        {0.8, {0.02, 0.015, 0.16}, {0.007, 0.008, 0.002}, {0.2, 0.15, -0.1}, 0.06,
                         0.03, 0.01}});
  f.char_length = 0.35;
  return f;
}

Fixture arm7() {
  Fixture f;
  f.name = "arm7";
  const Eigen::Vector3d y = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  constexpr double kLimit = 2.9;
  constexpr double kVelocity = 1.7;
  constexpr double kAcceleration = 10.0;
  std::vector<JointRow> joints = {
      {"joint1", z, {0, 0, 0.15}, kLimit, kVelocity, kAcceleration},
      {"joint2", y, {0, 0, 0.19}, kLimit, kVelocity, kAcceleration},
      {"joint3", z, {0, 0, 0.21}, kLimit, kVelocity, kAcceleration},
      {"joint4", y, {0, 0, 0.19}, kLimit, kVelocity, kAcceleration},
      {"joint5", z, {0, 0, 0.21}, kLimit, kVelocity, kAcceleration},
      {"joint6", y, {0, 0, 0.19}, kLimit, kVelocity, kAcceleration},
      {"joint7", z, {0, 0, 0.081}, kLimit, kVelocity, kAcceleration},
  };
  std::vector<BodyRow> bodies = {
      {3.45, {0, -0.03, 0.12}, {0.021, 0.020, 0.008}, {0.05, 0, 0}, 0.4, 0.3, 0.15},
      {3.48, {0.0003, 0.059, 0.042}, {0.022, 0.008, 0.021}, {0, 0.04, 0}, 0.4, 0.3, 0.15},
      {4.06, {0, 0.03, 0.13}, {0.032, 0.030, 0.009}, {-0.03, 0, 0.02}, 0.3, 0.25, 0.1},
      {3.48, {0, 0.067, 0.034}, {0.022, 0.008, 0.021}, {0, 0, 0.05}, 0.3, 0.25, 0.1},
      {2.16, {0.0001, 0.021, 0.076}, {0.013, 0.012, 0.004}, {0.02, 0.03, 0}, 0.2, 0.15, 0.05},
      {2.35, {0, 0.0006, 0.0004}, {0.006, 0.005, 0.004}, {0, 0, 0.1}, 0.2, 0.15, 0.05},
      {0.31, {0, 0, 0.02}, {0.0003, 0.0003, 0.0005}, {0, 0, 0}, 0.1, 0.08, 0.02},
  };
  f.model = make_chain("arm7", joints, bodies);
  // Bottle-sized object held 0.14 m past the flange.
  constexpr double kPayloadMass = 0.4271;
  f.payload = make_body({kPayloadMass, {0.005, -0.003, 0.14}, box_moments(kPayloadMass, 0.095, 0.058, 0.19),
                         {0, 0, 0.3}, 0, 0, 0});
  f.char_length = 0.19;
  return f;
}

}  // namespace

std::vector<std::string> builtin_fixture_names() { return {"pendulum1", "planar2", "chain3", "arm7"}; }

Fixture builtin_fixture(const std::string& name) {
  if (name == "pendulum1") return pendulum1();
  if (name == "planar2") return planar2();
  if (name == "chain3") return chain3();
  if (name == "arm7") return arm7();
  throw ValidationError("unknown fixture '" + name + "'");
}

RobotModel attach_payload(const RobotModel& model, const LinkInertialParams& payload) {
  if (model.links.empty()) throw ValidationError("cannot attach a payload to an empty model");
  RobotModel m = model;
  Link& last = m.links.back();
  last.params = lump(last.params, payload);
  return m;
}

std::vector<RawTrial> generate_dataset(const Fixture& fixture, const FourierTrajectory& traj,
                                       double rate, int trials, const NoiseSpec& noise) {
  if (trials < 1) throw ValidationError("at least one trial is required");
  if (!(rate > 2.0 * traj.omega * traj.harmonics / (2.0 * std::numbers::pi))) {
    throw ValidationError("sample rate aliases the highest trajectory harmonic");
  }
  if (noise.torque_abs_std < 0.0 || noise.torque_rel_std < 0.0 || noise.position_std < 0.0) {
    throw ValidationError("noise standard deviations must be non-negative");
  }
  const RobotModel model =
      fixture.payload ? attach_payload(fixture.model, *fixture.payload) : fixture.model;
  const int n = model.dof();
  if (traj.dof() != n) throw DimensionError("trajectory and fixture dof differ");

  const std::vector<double> times = sample_times(traj.duration, rate);
  const auto S = static_cast<Eigen::Index>(times.size());
  RawTrial clean;
  clean.timestamps.resize(S);
  clean.q.resize(S, n);
  clean.tau.resize(S, n);
  for (Eigen::Index k = 0; k < S; ++k) {
    const JointState s = fourier_eval(traj, times[static_cast<std::size_t>(k)]);
    clean.timestamps(k) = times[static_cast<std::size_t>(k)];
    clean.q.row(k) = s.q.transpose();
    clean.tau.row(k) = inverse_dynamics(model, s).transpose();
  }

  std::vector<RawTrial> out;
  out.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    RawTrial trial = clean;
    std::mt19937_64 rng(splitmix64(noise.seed + static_cast<std::uint64_t>(t)));
    std::normal_distribution<double> xi(0.0, 1.0);
    for (Eigen::Index k = 0; k < S; ++k) {
      for (int i = 0; i < n; ++i) {
        const double rel = xi(rng);
        const double abs = xi(rng);
        const double pos = xi(rng);
        trial.tau(k, i) = clean.tau(k, i) * (1.0 + noise.torque_rel_std * rel) +
                          noise.torque_abs_std * abs;
        trial.q(k, i) = clean.q(k, i) + noise.position_std * pos;
      }
    }
    out.push_back(std::move(trial));
  }
  return out;
}

}  // namespace physid
