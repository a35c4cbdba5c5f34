#include "physid/model.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "physid/errors.hpp"

namespace physid {

namespace {

constexpr std::array<std::string_view, kParamsPerLink> kParamNames = {
    "mass", "h_x", "h_y", "h_z", "I_xx", "I_xy", "I_xz",
    "I_yy", "I_yz", "I_zz", "viscous_friction", "coulomb_friction",
    "rotor_inertia"};

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

bool all_finite(const LinkInertialParams& p) {
  return std::isfinite(p.mass) && p.first_moment.allFinite() &&
         p.inertia.allFinite() && std::isfinite(p.viscous_friction) &&
         std::isfinite(p.coulomb_friction) && std::isfinite(p.rotor_inertia);
}

}  // namespace

std::string_view param_name(int index_in_link) {
  return kParamNames.at(static_cast<std::size_t>(index_in_link));
}

Eigen::Vector3d LinkInertialParams::com() const {
  if (mass == 0.0) {
    return Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
  }
  return first_moment / mass;
}

Eigen::Matrix3d LinkInertialParams::inertia_about_com() const {
  // I_origin = I_com + m S(c)ᵀS(c) and m S(c)ᵀS(c) = S(h)ᵀS(h) / m.
  if (mass == 0.0) return inertia;
  const Eigen::Matrix3d s = skew(first_moment);
  return inertia - s.transpose() * s / mass;
}

LinkInertialParams LinkInertialParams::from_com_frame(
    double mass, const Eigen::Vector3d& com, const Eigen::Matrix3d& inertia_com) {
  LinkInertialParams p;
  p.mass = mass;
  p.first_moment = mass * com;
  const Eigen::Matrix3d s = skew(com);
  p.inertia = inertia_com + mass * s.transpose() * s;
  return p;
}

LinkInertialParams lump(const LinkInertialParams& a, const LinkInertialParams& b) {
  LinkInertialParams out = a;
  out.mass = a.mass + b.mass;
  out.first_moment = a.first_moment + b.first_moment;
  out.inertia = a.inertia + b.inertia;
  return out;
}

void validate(const RobotModel& model) {
  if (model.links.empty()) {
    throw ValidationError("robot model '" + model.name + "' has no links");
  }
  if (!model.gravity.allFinite()) {
    throw ValidationError("gravity vector is not finite");
  }
  if (!(model.friction_smoothing > 0.0)) {
    throw ValidationError("friction smoothing must be positive");
  }
  for (const Link& link : model.links) {
    const JointSpec& j = link.joint;
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw ValidationError("joint '" + j.name + "': axis is not unit length");
    }
    if (!(j.position_lower <= j.position_upper)) {
      throw ValidationError("joint '" + j.name + "': lower limit exceeds upper limit");
    }
    if (!(j.velocity_limit > 0.0)) {
      throw ValidationError("joint '" + j.name + "': velocity limit must be positive");
    }
    if (!(j.acceleration_limit > 0.0)) {
      throw ValidationError("joint '" + j.name +
                            "': acceleration limit must be positive");
    }
    const LinkInertialParams& p = link.params;
    if (!all_finite(p)) {
      throw ValidationError("joint '" + j.name + "': non-finite link parameters");
    }
    if ((p.inertia - p.inertia.transpose()).cwiseAbs().maxCoeff() >= 1e-12) {
      throw ValidationError("joint '" + j.name + "': inertia is not symmetric");
    }
    if (p.viscous_friction < 0.0 || p.coulomb_friction < 0.0 || p.rotor_inertia < 0.0) {
      throw ValidationError("joint '" + j.name +
                            "': friction and rotor inertia must be non-negative");
    }
  }
}

Eigen::Matrix<double, kParamsPerLink, 1> pack_link(const LinkInertialParams& p) {
  Eigen::Matrix<double, kParamsPerLink, 1> v;
  const Eigen::Matrix3d& I = p.inertia;
  v << p.mass, p.first_moment.x(), p.first_moment.y(), p.first_moment.z(),
      I(0, 0), I(0, 1), I(0, 2), I(1, 1), I(1, 2), I(2, 2), p.viscous_friction,
      p.coulomb_friction, p.rotor_inertia;
  return v;
}

LinkInertialParams unpack_link(const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (b.size() < kInertialParamsPerLink) {
    throw DimensionError("link parameter block needs at least 10 entries");
  }
  LinkInertialParams p;
  p.mass = b(kMass);
  p.first_moment = Eigen::Vector3d(b(kHx), b(kHy), b(kHz));
  p.inertia << b(kIxx), b(kIxy), b(kIxz), b(kIxy), b(kIyy), b(kIyz), b(kIxz),
      b(kIyz), b(kIzz);
  if (b.size() >= kParamsPerLink) {
    p.viscous_friction = b(kViscous);
    p.coulomb_friction = b(kCoulomb);
    p.rotor_inertia = b(kRotor);
  }
  return p;
}

LinkInertialParams ParamVector::link(int link) const { return unpack_link(link_block(link)); }

void ParamVector::set_link(int link, const LinkInertialParams& p) {
  link_block(link) = pack_link(p);
}

ParamVector pack_params(const RobotModel& model) {
  ParamVector out = ParamVector::zeros(model.dof());
  for (int i = 0; i < model.dof(); ++i) out.set_link(i, model.links[i].params);
  return out;
}

RobotModel unpack_params(const ParamVector& values, const RobotModel& skeleton) {
  if (values.size() != skeleton.param_count()) {
    throw DimensionError("parameter vector has " + std::to_string(values.size()) +
                         " entries, model expects " +
                         std::to_string(skeleton.param_count()));
  }
  RobotModel out = skeleton;
  for (int i = 0; i < out.dof(); ++i) out.links[i].params = values.link(i);
  return out;
}

Eigen::Matrix4d pseudo_inertia(const LinkInertialParams& p) {
  Eigen::Matrix4d J;
  J.topLeftCorner<3, 3>() =
      0.5 * p.inertia.trace() * Eigen::Matrix3d::Identity() - p.inertia;
  J.topRightCorner<3, 1>() = p.first_moment;
  J.bottomLeftCorner<1, 3>() = p.first_moment.transpose();
  J(3, 3) = p.mass;
  return J;
}

Eigen::Matrix4d pseudo_inertia(const Eigen::Ref<const Eigen::VectorXd>& block) {
  return pseudo_inertia(unpack_link(block.head(kInertialParamsPerLink)));
}

LinkInertialParams from_pseudo_inertia(const Eigen::Matrix4d& J) {
  LinkInertialParams p;
  const Eigen::Matrix3d sigma = J.topLeftCorner<3, 3>();
  // tr(Σ) = ½ tr(I), so I = tr(Σ) 𝕀 − Σ.
  p.inertia = sigma.trace() * Eigen::Matrix3d::Identity() - sigma;
  p.first_moment = J.topRightCorner<3, 1>();
  p.mass = J(3, 3);
  return p;
}

FeasibilityReport is_physically_feasible(const LinkInertialParams& p, double tol) {
  FeasibilityReport r;
  const Eigen::Matrix4d J = pseudo_inertia(p);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(J, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = eig.eigenvalues()(0);

  r.min_friction = p.viscous_friction;
  std::string friction_name = "viscous_friction";
  if (p.coulomb_friction < r.min_friction) {
    r.min_friction = p.coulomb_friction;
    friction_name = "coulomb_friction";
  }
  if (p.rotor_inertia < r.min_friction) {
    r.min_friction = p.rotor_inertia;
    friction_name = "rotor_inertia";
  }

  // Friction entries may sit on their (closed) bound; the pseudo-inertia must
  // be strictly positive definite.
  if (r.min_friction < 0.0 && r.min_friction < r.min_eigenvalue) {
    r.margin = r.min_friction;
    r.binding = friction_name;
  } else {
    r.margin = r.min_eigenvalue;
    r.binding = "pseudo_inertia";
  }
  r.feasible = r.min_eigenvalue > tol && r.min_friction >= -tol;
  return r;
}

}  // namespace physid
