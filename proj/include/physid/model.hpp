#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace physid {

inline constexpr int kParamsPerLink = 13;
inline constexpr int kInertialParamsPerLink = 10;

/// Offsets of each entry inside one link's 13-parameter block.
enum ParamIndex : int {
  kMass = 0,
  kHx,
  kHy,
  kHz,
  kIxx,
  kIxy,
  kIxz,
  kIyy,
  kIyz,
  kIzz,
  kViscous,
  kCoulomb,
  kRotor,
};

std::string_view param_name(int index_in_link);

struct JointSpec {
  std::string name;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  // Pose of the joint frame relative to the parent link frame at q = 0.
  Eigen::Isometry3d parent_frame_pose = Eigen::Isometry3d::Identity();
  double position_lower = 0.0;
  double position_upper = 0.0;
  double velocity_limit = 0.0;
  double acceleration_limit = 0.0;
};

/// Inertial, friction and rotor parameters of one link. `first_moment` and
/// `inertia` are expressed about the link frame origin, not the CoM.
struct LinkInertialParams {
  double mass = 0.0;
  Eigen::Vector3d first_moment = Eigen::Vector3d::Zero();
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();
  double viscous_friction = 0.0;
  double coulomb_friction = 0.0;
  double rotor_inertia = 0.0;

  /// CoM position; undefined (NaN) for zero mass.
  Eigen::Vector3d com() const;
  /// Rotational inertia about the CoM, in link-frame axes.
  Eigen::Matrix3d inertia_about_com() const;

  static LinkInertialParams from_com_frame(double mass,
                                           const Eigen::Vector3d& com,
                                           const Eigen::Matrix3d& inertia_com);
};

/// Lumped parameters of two rigidly attached bodies (friction from `a`).
LinkInertialParams lump(const LinkInertialParams& a,
                        const LinkInertialParams& b);

struct Link {
  JointSpec joint;
  LinkInertialParams params;
  std::string link_name;
};

struct RobotModel {
  std::string name;
  std::vector<Link> links;
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  // Velocity scale of the tanh Coulomb friction model, rad/s.
  double friction_smoothing = 1e-3;

  int dof() const { return static_cast<int>(links.size()); }
  int param_count() const { return kParamsPerLink * dof(); }
};

/// Throws ValidationError if any JointSpec or LinkInertialParams invariant
/// is violated. Degenerate position ranges (lower == upper) are allowed.
void validate(const RobotModel& model);

/// Flat 13N parameter vector, link-major, ordered per ParamIndex.
struct ParamVector {
  Eigen::VectorXd values;

  ParamVector() = default;
  explicit ParamVector(Eigen::VectorXd v) : values(std::move(v)) {}
  static ParamVector zeros(int dof) {
    return ParamVector(Eigen::VectorXd::Zero(kParamsPerLink * dof));
  }

  int size() const { return static_cast<int>(values.size()); }
  int dof() const { return size() / kParamsPerLink; }
  auto link_block(int link) { return values.segment<kParamsPerLink>(kParamsPerLink * link); }
  auto link_block(int link) const { return values.segment<kParamsPerLink>(kParamsPerLink * link); }
  LinkInertialParams link(int link) const;
  void set_link(int link, const LinkInertialParams& p);
};

ParamVector pack_params(const RobotModel& model);
RobotModel unpack_params(const ParamVector& values, const RobotModel& skeleton);

Eigen::Matrix<double, kParamsPerLink, 1> pack_link(const LinkInertialParams& p);
LinkInertialParams unpack_link(const Eigen::Ref<const Eigen::VectorXd>& block);

/// J = [[Σ, h], [hᵀ, m]] with Σ = ½ tr(I) 𝕀 − I.
Eigen::Matrix4d pseudo_inertia(const LinkInertialParams& p);
/// Same map applied to the first ten entries of a link block.
Eigen::Matrix4d pseudo_inertia(const Eigen::Ref<const Eigen::VectorXd>& block);
/// Inverse of `pseudo_inertia` on (m, h, I); friction fields are zero.
LinkInertialParams from_pseudo_inertia(const Eigen::Matrix4d& J);

inline constexpr double kDefaultFeasibilityTol = 1e-9;

struct FeasibilityReport {
  bool feasible = false;
  // Smallest eigenvalue of the pseudo-inertia.
  double min_eigenvalue = 0.0;
  // Smallest of the friction and rotor entries.
  double min_friction = 0.0;
  // Value of the binding constraint: the pseudo-inertia eigenvalue unless a
  // friction or rotor entry is negative, in which case that entry.
  double margin = 0.0;
  std::string binding;
};

FeasibilityReport is_physically_feasible(const LinkInertialParams& p,
                                         double tol = kDefaultFeasibilityTol);

}  // namespace physid
