#include "physid/urdf.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "physid/errors.hpp"

namespace physid {

namespace {

namespace pt = boost::property_tree;

std::optional<std::string> attribute(const pt::ptree& node, const std::string& key) {
  if (auto v = node.get_optional<std::string>("<xmlattr>." + key)) return *v;
  return std::nullopt;
}

double parse_number(const std::string& token, const std::string& context) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == begin || (end && *end != '\0') || !std::isfinite(v)) {
    throw ValidationError(context + ": '" + token + "' is not a finite number");
  }
  return v;
}

Eigen::Vector3d parse_vector3(const std::string& text, const std::string& context) {
  std::istringstream in(text);
  Eigen::Vector3d v;
  std::string token;
  int count = 0;
  while (in >> token) {
    if (count == 3) throw ValidationError(context + ": expected 3 numbers");
    v(count++) = parse_number(token, context);
  }
  if (count != 3) throw ValidationError(context + ": expected 3 numbers");
  return v;
}

double required_number(const pt::ptree& node, const std::string& key,
                       const std::string& context) {
  auto v = attribute(node, key);
  if (!v) throw ValidationError(context + ": missing attribute '" + key + "'");
  return parse_number(*v, context + " " + key);
}

Eigen::Matrix3d rpy_to_rotation(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d rotation_to_rpy(const Eigen::Matrix3d& R) {
  const Eigen::Vector3d ypr = R.eulerAngles(2, 1, 0);
  return Eigen::Vector3d(ypr.z(), ypr.y(), ypr.x());
}

Eigen::Isometry3d parse_origin(const pt::ptree& parent, const std::string& context) {
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  auto origin = parent.get_child_optional("origin");
  if (!origin) return pose;
  if (auto xyz = attribute(*origin, "xyz")) {
    pose.translation() = parse_vector3(*xyz, context + " origin xyz");
  }
  if (auto rpy = attribute(*origin, "rpy")) {
    pose.linear() = rpy_to_rotation(parse_vector3(*rpy, context + " origin rpy"));
  }
  return pose;
}

struct RawJoint {
  std::string name;
  std::string parent;
  std::string child;
  JointSpec spec;
  double viscous = 0.0;
  double coulomb = 0.0;
  double rotor = 0.0;
};

RawJoint parse_joint(const pt::ptree& node) {
  RawJoint j;
  const auto name = attribute(node, "name");
  if (!name) throw ValidationError("joint without a name attribute");
  j.name = *name;
  const std::string ctx = "joint '" + j.name + "'";
  const std::string type = attribute(node, "type").value_or("");
  if (type != "revolute") {
    throw UnsupportedTopologyError(ctx + ": joint type '" + type +
                                   "' is not supported (revolute only)");
  }
  auto parent = node.get_child_optional("parent");
  auto child = node.get_child_optional("child");
  if (!parent || !child) throw ValidationError(ctx + ": missing parent or child");
  j.parent = attribute(*parent, "link").value_or("");
  j.child = attribute(*child, "link").value_or("");
  if (j.parent.empty() || j.child.empty()) {
    throw ValidationError(ctx + ": parent/child link attribute missing");
  }

  j.spec.name = j.name;
  j.spec.parent_frame_pose = parse_origin(node, ctx);
  if (auto axis = node.get_child_optional("axis")) {
    if (auto xyz = attribute(*axis, "xyz")) {
      Eigen::Vector3d a = parse_vector3(*xyz, ctx + " axis");
      if (a.norm() == 0.0) throw ValidationError(ctx + ": zero axis");
      j.spec.axis = a.normalized();
    }
  } else {
    j.spec.axis = Eigen::Vector3d::UnitX();  // URDF default
  }

  auto limit = node.get_child_optional("limit");
  if (!limit) throw ValidationError(ctx + ": missing <limit>");
  j.spec.position_lower = required_number(*limit, "lower", ctx + " limit");
  j.spec.position_upper = required_number(*limit, "upper", ctx + " limit");
  j.spec.velocity_limit = required_number(*limit, "velocity", ctx + " limit");
  j.spec.acceleration_limit = required_number(*limit, "acceleration", ctx + " limit");

  if (auto dyn = node.get_child_optional("dynamics")) {
    if (auto v = attribute(*dyn, "damping")) j.viscous = parse_number(*v, ctx + " damping");
    if (auto v = attribute(*dyn, "friction")) j.coulomb = parse_number(*v, ctx + " friction");
    if (auto v = attribute(*dyn, "rotor_inertia")) {
      j.rotor = parse_number(*v, ctx + " rotor_inertia");
    }
  }
  return j;
}

LinkInertialParams parse_inertial(const pt::ptree& link, const std::string& ctx) {
  auto inertial = link.get_child_optional("inertial");
  if (!inertial) throw ValidationError(ctx + ": missing <inertial>");
  const Eigen::Isometry3d origin = parse_origin(*inertial, ctx + " inertial");
  auto mass = inertial->get_child_optional("mass");
  auto inertia = inertial->get_child_optional("inertia");
  if (!mass || !inertia) throw ValidationError(ctx + ": <inertial> needs <mass> and <inertia>");
  const double m = required_number(*mass, "value", ctx + " mass");
  Eigen::Matrix3d Ic;
  const double ixx = required_number(*inertia, "ixx", ctx + " inertia");
  const double ixy = required_number(*inertia, "ixy", ctx + " inertia");
  const double ixz = required_number(*inertia, "ixz", ctx + " inertia");
  const double iyy = required_number(*inertia, "iyy", ctx + " inertia");
  const double iyz = required_number(*inertia, "iyz", ctx + " inertia");
  const double izz = required_number(*inertia, "izz", ctx + " inertia");
  Ic << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
  const Eigen::Matrix3d R = origin.linear();
  return LinkInertialParams::from_com_frame(m, origin.translation(), R * Ic * R.transpose());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt3(const Eigen::Vector3d& v) {
  return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z());
}

}  // namespace

RobotModel parse_robot_description(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed robot description: " + e.message(),
                     static_cast<int>(e.line()));
  }
  auto robot = tree.get_child_optional("robot");
  if (!robot) throw ParseError("document has no <robot> element", 0);

  RobotModel model;
  model.name = attribute(*robot, "name").value_or("robot");

  std::map<std::string, const pt::ptree*> links;
  std::vector<RawJoint> joints;
  for (const auto& [tag, node] : *robot) {
    if (tag == "link") {
      const auto name = attribute(node, "name");
      if (!name) throw ValidationError("link without a name attribute");
      links[*name] = &node;
    } else if (tag == "joint") {
      joints.push_back(parse_joint(node));
    } else if (tag == "gravity") {
      if (auto xyz = attribute(node, "xyz")) model.gravity = parse_vector3(*xyz, "gravity");
    } else if (tag == "friction_smoothing") {
      model.friction_smoothing = required_number(node, "value", "friction_smoothing");
    }
  }
  if (joints.empty()) throw ValidationError("robot description has no joints");

  std::map<std::string, std::size_t> joint_by_parent;
  std::set<std::string> children;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const RawJoint& j = joints[i];
    if (!links.count(j.parent) || !links.count(j.child)) {
      throw ValidationError("joint '" + j.name + "' references an unknown link");
    }
    if (!joint_by_parent.emplace(j.parent, i).second) {
      throw UnsupportedTopologyError("link '" + j.parent +
                                     "' has more than one child joint (branching chain)");
    }
    if (!children.insert(j.child).second) {
      throw UnsupportedTopologyError("link '" + j.child + "' has more than one parent joint");
    }
  }
  std::vector<std::string> roots;
  for (const auto& [name, node] : links) {
    if (!children.count(name) && joint_by_parent.count(name)) roots.push_back(name);
  }
  if (roots.size() != 1) {
    throw UnsupportedTopologyError("robot description must contain exactly one serial chain");
  }

  std::string current = roots.front();
  std::size_t visited = 0;
  while (joint_by_parent.count(current)) {
    const RawJoint& j = joints[joint_by_parent.at(current)];
    Link link;
    link.joint = j.spec;
    link.link_name = j.child;
    link.params = parse_inertial(*links.at(j.child), "link '" + j.child + "'");
    link.params.viscous_friction = j.viscous;
    link.params.coulomb_friction = j.coulomb;
    link.params.rotor_inertia = j.rotor;
    model.links.push_back(std::move(link));
    current = j.child;
    if (++visited > joints.size()) {
      throw UnsupportedTopologyError("kinematic loop detected");
    }
  }
  if (visited != joints.size()) {
    throw UnsupportedTopologyError("robot description contains disconnected joints");
  }
  validate(model);
  return model;
}

RobotModel load_robot_description(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open robot description '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_robot_description(buf.str());
}

std::string to_robot_description(const RobotModel& model) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\"?>\n";
  out << "<robot name=\"" << model.name << "\">\n";
  out << "  <gravity xyz=\"" << fmt3(model.gravity) << "\"/>\n";
  out << "  <friction_smoothing value=\"" << fmt(model.friction_smoothing) << "\"/>\n";
  out << "  <link name=\"base\"/>\n";
  std::string parent = "base";
  for (const Link& link : model.links) {
    const LinkInertialParams& p = link.params;
    const Eigen::Vector3d com = p.mass != 0.0 ? p.com() : Eigen::Vector3d::Zero();
    const Eigen::Matrix3d Ic = p.inertia_about_com();
    const std::string child = link.link_name.empty() ? link.joint.name + "_link" : link.link_name;
    out << "  <link name=\"" << child << "\">\n"
        << "    <inertial>\n"
        << "      <origin xyz=\"" << fmt3(com) << "\" rpy=\"0 0 0\"/>\n"
        << "      <mass value=\"" << fmt(p.mass) << "\"/>\n"
        << "      <inertia ixx=\"" << fmt(Ic(0, 0)) << "\" ixy=\"" << fmt(Ic(0, 1))
        << "\" ixz=\"" << fmt(Ic(0, 2)) << "\" iyy=\"" << fmt(Ic(1, 1)) << "\" iyz=\""
        << fmt(Ic(1, 2)) << "\" izz=\"" << fmt(Ic(2, 2)) << "\"/>\n"
        << "    </inertial>\n"
        << "  </link>\n";
    const JointSpec& j = link.joint;
    out << "  <joint name=\"" << j.name << "\" type=\"revolute\">\n"
        << "    <parent link=\"" << parent << "\"/>\n"
        << "    <child link=\"" << child << "\"/>\n"
        << "    <origin xyz=\"" << fmt3(j.parent_frame_pose.translation()) << "\" rpy=\""
        << fmt3(rotation_to_rpy(j.parent_frame_pose.linear())) << "\"/>\n"
        << "    <axis xyz=\"" << fmt3(j.axis) << "\"/>\n"
        << "    <limit lower=\"" << fmt(j.position_lower) << "\" upper=\""
        << fmt(j.position_upper) << "\" velocity=\"" << fmt(j.velocity_limit)
        << "\" acceleration=\"" << fmt(j.acceleration_limit) << "\" effort=\"0\"/>\n"
        << "    <dynamics damping=\"" << fmt(p.viscous_friction) << "\" friction=\""
        << fmt(p.coulomb_friction) << "\" rotor_inertia=\"" << fmt(p.rotor_inertia)
        << "\"/>\n"
        << "  </joint>\n";
    parent = child;
  }
  out << "</robot>\n";
  return out.str();
}

}  // namespace physid
