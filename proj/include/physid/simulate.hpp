#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "physid/excite.hpp"
#include "physid/model.hpp"
#include "physid/signals.hpp"

namespace physid {

struct NoiseSpec {
  double torque_abs_std = 0.0;  // N·m
  double torque_rel_std = 0.0;  // fraction of the torque
  double position_std = 0.0;    // rad
  std::uint64_t seed = 0;
};

struct Fixture {
  std::string name;
  RobotModel model;
  std::optional<LinkInertialParams> payload;  // last-link frame
  double char_length = 0.0;                   // m, scales the CoM error
};

/// Ground truth for the built-in fixtures:
///
///   pendulum1  one link about y, m = 1, CoM (0, 0, −0.5), I_com = diag(0.1, 0.1, 0.01)
///   planar2    two links about y in the vertical plane, 0.5 m and 0.4 m long
///   chain3     axes z, y, y with off-axis CoMs and full inertia tensors
///   arm7       axes z y z y z y z, positions ±2.9 rad, velocities ±1.7 rad/s,
///              accelerations ±10 rad/s², and a 0.4271 kg bottle-sized payload
///
/// Throws ValidationError for an unknown name.
Fixture builtin_fixture(const std::string& name);
std::vector<std::string> builtin_fixture_names();

/// The model with `payload` lumped into the last link.
RobotModel attach_payload(const RobotModel& model, const LinkInertialParams& payload);

/// Samples `traj` at `rate` over its duration and records inverse-dynamics
/// torques of the fixture (payload attached when present), then adds
/// τ·(1 + rel·ξ) + abs·ξ' to torques and σ·ξ'' to positions. Trial k draws
/// from its own generator seeded with splitmix64(seed + k). Throws
/// ValidationError when the rate aliases the highest harmonic or trials < 1.
std::vector<RawTrial> generate_dataset(const Fixture& fixture, const FourierTrajectory& traj,
                                       double rate, int trials, const NoiseSpec& noise);

}  // namespace physid
