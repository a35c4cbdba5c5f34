#include "physid/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "physid/errors.hpp"

namespace physid {

namespace {

struct LinkKinematics {
  Eigen::Matrix3d R;      // link frame axes in parent coordinates
  Eigen::Vector3d p;      // link frame origin in parent coordinates
  Eigen::Vector3d omega;  // angular velocity, link coordinates
  Eigen::Vector3d alpha;  // angular acceleration, link coordinates
  Eigen::Vector3d accel;  // origin linear acceleration minus gravity, link coordinates
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

// Maps [Ixx, Ixy, Ixz, Iyy, Iyz, Izz] to I·v.
Eigen::Matrix<double, 3, 6> inertia_action(const Eigen::Vector3d& v) {
  Eigen::Matrix<double, 3, 6> L;
  L << v.x(), v.y(), v.z(), 0, 0, 0,  //
      0, v.x(), 0, v.y(), v.z(), 0,   //
      0, 0, v.x(), 0, v.y(), v.z();
  return L;
}

std::vector<LinkKinematics> propagate(const RobotModel& model, const JointState& s) {
  const int n = model.dof();
  std::vector<LinkKinematics> kin(static_cast<std::size_t>(n));
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d alpha = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel = -model.gravity;
  for (int i = 0; i < n; ++i) {
    const JointSpec& j = model.links[i].joint;
    LinkKinematics& k = kin[i];
    k.R = j.parent_frame_pose.linear() * Eigen::AngleAxisd(s.q(i), j.axis).toRotationMatrix();
    k.p = j.parent_frame_pose.translation();
    const Eigen::Matrix3d Rt = k.R.transpose();
    const Eigen::Vector3d omega_in = Rt * omega;
    k.omega = omega_in + j.axis * s.qd(i);
    k.alpha = Rt * alpha + j.axis * s.qdd(i) + omega_in.cross(j.axis * s.qd(i));
    k.accel = Rt * (accel + alpha.cross(k.p) + omega.cross(omega.cross(k.p)));
    omega = k.omega;
    alpha = k.alpha;
    accel = k.accel;
  }
  return kin;
}

double smooth_sign(double v, double eps) { return std::tanh(v / eps); }

}  // namespace

void check_state(const RobotModel& model, const JointState& s) {
  const auto n = static_cast<Eigen::Index>(model.dof());
  if (s.q.size() != n || s.qd.size() != n || s.qdd.size() != n) {
    throw DimensionError("joint state size does not match model dof " + std::to_string(n));
  }
  if (!s.q.allFinite() || !s.qd.allFinite() || !s.qdd.allFinite()) {
    throw ValidationError("joint state contains non-finite values");
  }
}

std::vector<Eigen::Isometry3d> forward_kinematics(const RobotModel& model,
                                                  const Eigen::VectorXd& q) {
  if (q.size() != model.dof()) throw DimensionError("q size does not match model dof");
  std::vector<Eigen::Isometry3d> poses;
  poses.reserve(model.links.size());
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  for (int i = 0; i < model.dof(); ++i) {
    const JointSpec& j = model.links[i].joint;
    T = T * j.parent_frame_pose * Eigen::AngleAxisd(q(i), j.axis);
    poses.push_back(T);
  }
  return poses;
}

Eigen::VectorXd inverse_dynamics(const RobotModel& model, const JointState& s) {
  check_state(model, s);
  const int n = model.dof();
  const auto kin = propagate(model, s);
  Eigen::VectorXd tau(n);
  Eigen::Vector3d f_child = Eigen::Vector3d::Zero();
  Eigen::Vector3d n_child = Eigen::Vector3d::Zero();
  for (int i = n - 1; i >= 0; --i) {
    const LinkInertialParams& p = model.links[i].params;
    const LinkKinematics& k = kin[i];
    const Eigen::Vector3d& h = p.first_moment;
    Eigen::Vector3d f = p.mass * k.accel + k.alpha.cross(h) + k.omega.cross(k.omega.cross(h));
    Eigen::Vector3d m = p.inertia * k.alpha + k.omega.cross(p.inertia * k.omega) + h.cross(k.accel);
    if (i + 1 < n) {
      const LinkKinematics& c = kin[i + 1];
      const Eigen::Vector3d fc = c.R * f_child;
      f += fc;
      m += c.R * n_child + c.p.cross(fc);
    }
    const JointSpec& j = model.links[i].joint;
    tau(i) = j.axis.dot(m) + p.viscous_friction * s.qd(i) +
             p.coulomb_friction * smooth_sign(s.qd(i), model.friction_smoothing) +
             p.rotor_inertia * s.qdd(i);
    f_child = f;
    n_child = m;
  }
  return tau;
}

Eigen::MatrixXd regressor(const RobotModel& model, const JointState& s) {
  check_state(model, s);
  const int n = model.dof();
  const auto kin = propagate(model, s);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, kParamsPerLink * n);

  // Unit-parameter sweep: the body wrench of link j is linear in its ten
  // inertial parameters; each column is carried down the chain exactly as the
  // backward Newton-Euler pass carries a wrench.
  Eigen::Matrix<double, 6, kInertialParamsPerLink> Y;
  for (int j = 0; j < n; ++j) {
    const LinkKinematics& k = kin[j];
    Y.setZero();
    Y.block<3, 1>(0, kMass) = k.accel;
    Y.block<3, 3>(0, kHx) = skew(k.alpha) + skew(k.omega) * skew(k.omega);
    Y.block<3, 3>(3, kHx) = -skew(k.accel);
    Y.block<3, 6>(3, kIxx) = inertia_action(k.alpha) + skew(k.omega) * inertia_action(k.omega);

    const int col = kParamsPerLink * j;
    for (int i = j; i >= 0; --i) {
      W.block<1, kInertialParamsPerLink>(i, col) =
          model.links[i].joint.axis.transpose() * Y.bottomRows<3>();
      if (i == 0) break;
      const LinkKinematics& c = kin[i];
      const Eigen::Matrix<double, 3, kInertialParamsPerLink> F = c.R * Y.topRows<3>();
      Y.bottomRows<3>() = c.R * Y.bottomRows<3>() + skew(c.p) * F;
      Y.topRows<3>() = F;
    }
    W(j, col + kViscous) = s.qd(j);
    W(j, col + kCoulomb) = smooth_sign(s.qd(j), model.friction_smoothing);
    W(j, col + kRotor) = s.qdd(j);
  }
  return W;
}

Eigen::VectorXd RegressorStack::expand(const Eigen::VectorXd& free) const {
  if (free.size() != free_count()) throw DimensionError("free vector size mismatch");
  Eigen::VectorXd full = fixed_values;
  for (int c = 0; c < free_count(); ++c) full(free_indices[c]) = free(c);
  return full;
}

Eigen::VectorXd RegressorStack::restrict(const Eigen::VectorXd& full) const {
  if (full.size() != fixed_values.size()) throw DimensionError("full vector size mismatch");
  Eigen::VectorXd free(free_count());
  for (int c = 0; c < free_count(); ++c) free(c) = full(free_indices[c]);
  return free;
}

RegressorStack stack_regressor(const RobotModel& model, const std::vector<JointState>& states,
                               const std::vector<Eigen::VectorXd>& torques,
                               const std::vector<bool>& fixed_mask,
                               const ParamVector& fixed_values) {
  const int n = model.dof();
  const int p = model.param_count();
  if (states.size() != torques.size()) {
    throw DimensionError("states and torques have different sample counts");
  }
  if (!fixed_mask.empty() && static_cast<int>(fixed_mask.size()) != p) {
    throw DimensionError("fixed mask must have 13N entries");
  }
  const bool any_fixed =
      !fixed_mask.empty() && std::find(fixed_mask.begin(), fixed_mask.end(), true) != fixed_mask.end();
  if (any_fixed && fixed_values.size() != p) {
    throw DimensionError("fixed values must have 13N entries");
  }

  RegressorStack out;
  out.dof = n;
  out.sample_count = static_cast<int>(states.size());
  out.fixed_values = any_fixed ? fixed_values.values : Eigen::VectorXd::Zero(p);
  std::vector<int> fixed_indices;
  for (int k = 0; k < p; ++k) {
    const bool fixed = any_fixed && fixed_mask[k];
    if (fixed) {
      if (!std::isfinite(fixed_values.values(k))) {
        throw ValidationError("fixed parameter " + std::to_string(k) + " is not finite");
      }
      fixed_indices.push_back(k);
    } else {
      out.free_indices.push_back(k);
      out.fixed_values(k) = 0.0;
    }
  }

  const Eigen::Index rows = static_cast<Eigen::Index>(states.size()) * n;
  out.W.resize(rows, out.free_count());
  out.w0 = Eigen::VectorXd::Zero(rows);
  out.T.resize(rows);
  Eigen::VectorXd alpha_fixed(fixed_indices.size());
  for (std::size_t c = 0; c < fixed_indices.size(); ++c) {
    alpha_fixed(static_cast<Eigen::Index>(c)) = fixed_values.values(fixed_indices[c]);
  }
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (torques[s].size() != n) throw DimensionError("torque sample size mismatch");
    const Eigen::MatrixXd Ws = regressor(model, states[s]);
    const Eigen::Index r0 = static_cast<Eigen::Index>(s) * n;
    for (int c = 0; c < out.free_count(); ++c) out.W.block(r0, c, n, 1) = Ws.col(out.free_indices[c]);
    for (std::size_t c = 0; c < fixed_indices.size(); ++c) {
      out.w0.segment(r0, n) += Ws.col(fixed_indices[c]) * alpha_fixed(static_cast<Eigen::Index>(c));
    }
    out.T.segment(r0, n) = torques[s];
  }
  return out;
}

void write_stack_csv(std::ostream& out, const RegressorStack& stack) {
  for (int c = 0; c < stack.free_count(); ++c) out << "W_" << stack.free_indices[c] << ',';
  out << "w0,T\n";
  char buf[40];
  for (Eigen::Index r = 0; r < stack.W.rows(); ++r) {
    for (Eigen::Index c = 0; c < stack.W.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g,", stack.W(r, c));
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g,", stack.w0(r));
    out << buf;
    std::snprintf(buf, sizeof(buf), "%.17g\n", stack.T(r));
    out << buf;
  }
}

}  // namespace physid
