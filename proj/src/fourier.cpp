#include <cmath>

#include "physid/errors.hpp"
#include "physid/excite.hpp"

namespace physid {

FourierTrajectory FourierTrajectory::zeros(int dof, double omega, int harmonics) {
  FourierTrajectory t;
  t.omega = omega;
  t.harmonics = harmonics;
  t.q0 = Eigen::VectorXd::Zero(dof);
  t.a = Eigen::MatrixXd::Zero(dof, harmonics);
  t.b = Eigen::MatrixXd::Zero(dof, harmonics);
  t.duration = t.period();
  return t;
}

Eigen::VectorXd FourierTrajectory::to_vector() const {
  const int n = dof();
  const int L = harmonics;
  Eigen::VectorXd x(decision_size());
  x.head(n) = q0;
  for (int i = 0; i < n; ++i) {
    x.segment(n + i * L, L) = a.row(i).transpose();
    x.segment(n + n * L + i * L, L) = b.row(i).transpose();
  }
  return x;
}

FourierTrajectory FourierTrajectory::from_vector(const Eigen::VectorXd& x, int dof, double omega,
                                                 int harmonics) {
  FourierTrajectory t = zeros(dof, omega, harmonics);
  if (x.size() != t.decision_size()) throw DimensionError("decision vector size mismatch");
  const int L = harmonics;
  t.q0 = x.head(dof);
  for (int i = 0; i < dof; ++i) {
    t.a.row(i) = x.segment(dof + i * L, L).transpose();
    t.b.row(i) = x.segment(dof + dof * L + i * L, L).transpose();
  }
  return t;
}

JointState fourier_eval(const FourierTrajectory& traj, double t) {
  if (!(traj.omega > 0.0) || traj.harmonics < 1) {
    throw ValidationError("trajectory needs omega > 0 and at least one harmonic");
  }
  if (traj.a.rows() != traj.dof() || traj.b.rows() != traj.dof() ||
      traj.a.cols() != traj.harmonics || traj.b.cols() != traj.harmonics) {
    throw DimensionError("trajectory coefficient shapes disagree");
  }
  const double slack = 1e-12 * std::max(1.0, traj.duration);
  if (!(t >= -slack && t <= traj.duration + slack)) {
    throw ValidationError("time " + std::to_string(t) + " outside trajectory duration");
  }
  const int n = traj.dof();
  JointState s;
  s.q = traj.q0;
  s.qd = Eigen::VectorXd::Zero(n);
  s.qdd = Eigen::VectorXd::Zero(n);
  for (int l = 1; l <= traj.harmonics; ++l) {
    const double w = traj.omega * l;
    const double sn = std::sin(w * t);
    const double cs = std::cos(w * t);
    const auto a = traj.a.col(l - 1);
    const auto b = traj.b.col(l - 1);
    s.q += (a * sn - b * cs) / w;
    s.qd += a * cs + b * sn;
    s.qdd += w * (b * cs - a * sn);
  }
  return s;
}

std::vector<double> sample_times(double duration, double rate) {
  if (!(rate > 0.0) || !(duration >= 0.0)) throw ValidationError("invalid sampling grid");
  const auto count = static_cast<long>(std::floor(duration * rate + 1e-9)) + 1;
  std::vector<double> t(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    t[static_cast<std::size_t>(k)] = std::min(static_cast<double>(k) / rate, duration);
  }
  return t;
}

std::vector<JointState> sample_trajectory(const FourierTrajectory& traj, double rate) {
  std::vector<JointState> out;
  for (double t : sample_times(traj.duration, rate)) out.push_back(fourier_eval(traj, t));
  return out;
}

}  // namespace physid
