#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "physid/errors.hpp"
#include "physid/excite.hpp"
#include "physid/identify.hpp"

namespace physid {

InformationValue information_objective(const Eigen::MatrixXd& W, double gamma) {
  if (W.rows() < W.cols() || W.cols() == 0) {
    throw ValidationError("information objective needs at least as many rows as columns");
  }
  const Eigen::VectorXd sigma = Eigen::BDCSVD<Eigen::MatrixXd>(W).singularValues();
  InformationValue v;
  v.lambda_max = sigma(0) * sigma(0);
  v.lambda_min = sigma(sigma.size() - 1) * sigma(sigma.size() - 1);
  v.f_e = -v.lambda_min;
  if (!(v.lambda_max > 0.0) || v.lambda_min <= 1e-12 * v.lambda_max) {
    v.f_c = std::numeric_limits<double>::infinity();
    v.value = v.f_c;
    return v;
  }
  v.f_c = std::sqrt(v.lambda_max / v.lambda_min);
  v.value = v.f_c + gamma * v.f_e;
  return v;
}

Eigen::MatrixXd structural_identifiable_basis(const RobotModel& model, double threshold,
                                              std::uint64_t seed) {
  const int n = model.dof();
  const int samples = 20 * kParamsPerLink;
  std::mt19937_64 rng(seed ^ 0x5eedba5e0fULL);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::MatrixXd W(static_cast<Eigen::Index>(samples) * n, model.param_count());
  for (int s = 0; s < samples; ++s) {
    JointState st{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
      const JointSpec& j = model.links[i].joint;
      const double mid = 0.5 * (j.position_lower + j.position_upper);
      const double half = 0.5 * (j.position_upper - j.position_lower);
      st.q(i) = mid + half * unit(rng);
      st.qd(i) = j.velocity_limit * unit(rng);
      st.qdd(i) = j.acceleration_limit * unit(rng);
    }
    W.middleRows(static_cast<Eigen::Index>(s) * n, n) = regressor(model, st);
  }
  return identifiable_subspace(W, threshold).identifiable_basis;
}

InformationValue trajectory_information(const FourierTrajectory& traj, const DesignProblem& problem,
                                        const Eigen::MatrixXd& basis) {
  const RobotModel& model = problem.model;
  const int n = model.dof();
  const std::vector<double> times = sample_times(traj.duration, problem.sample_rate);
  const Eigen::Index cols = basis.size() > 0 ? basis.cols() : model.param_count();
  Eigen::MatrixXd W(static_cast<Eigen::Index>(times.size()) * n, cols);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Eigen::MatrixXd Wk = regressor(model, fourier_eval(traj, times[k]));
    const Eigen::Index r0 = static_cast<Eigen::Index>(k) * n;
    if (basis.size() > 0) {
      W.middleRows(r0, n).noalias() = Wk * basis;
    } else {
      W.middleRows(r0, n) = Wk;
    }
  }
  return information_objective(W, problem.gamma);
}

}  // namespace physid
