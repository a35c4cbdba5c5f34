#pragma once

#include <filesystem>
#include <string>

#include "physid/model.hpp"

namespace physid {

/// Parses the supported URDF subset: one serial chain of revolute joints,
/// each with a complete `<limit>` (lower, upper, velocity, acceleration) and
/// a child link carrying `<inertial>`. Optional extensions:
///   <dynamics damping="μ_v" friction="μ_c" rotor_inertia="I_r"/> on joints,
///   <gravity xyz="..."/> and <friction_smoothing value="..."/> under <robot>.
/// Inertia in the file is about the CoM (URDF convention) and is converted to
/// the link frame origin.
///
/// Throws ParseError for malformed XML, UnsupportedTopologyError for anything
/// other than a single revolute chain, ValidationError for missing or invalid
/// fields (the message names the joint).
RobotModel parse_robot_description(const std::string& text);

RobotModel load_robot_description(const std::filesystem::path& path);

/// Writes `model` in the same subset; inertia is re-expressed about the CoM.
std::string to_robot_description(const RobotModel& model);

}  // namespace physid
