#include "physid/identify.hpp"

#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "physid/errors.hpp"

namespace physid {

namespace {

Eigen::Matrix4d unit_pseudo_inertia(int k) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(kInertialParamsPerLink);
  e(k) = 1.0;
  return pseudo_inertia(e);
}

std::vector<FeasibilityReport> feasibility_per_link(const ParamVector& alpha) {
  std::vector<FeasibilityReport> out;
  for (int i = 0; i < alpha.dof(); ++i) out.push_back(is_physically_feasible(alpha.link(i), 0.0));
  return out;
}

void require_rows(const RegressorStack& stack) {
  if (stack.W.rows() == 0 || stack.W.cols() == 0) {
    throw ValidationError("regressor stack is empty");
  }
  if (stack.T.size() != stack.W.rows() || stack.w0.size() != stack.W.rows()) {
    throw DimensionError("regressor stack rows disagree");
  }
}

// Minimum-norm solution of W x ≈ b within the identifiable subspace, with
// unidentifiable directions copied from `fill`.
Eigen::VectorXd truncated_least_squares(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                                        const SubspaceReport& sub, const Eigen::VectorXd& fill) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(W.cols());
  if (sub.rank > 0) {
    const Eigen::MatrixXd WV = W * sub.identifiable_basis;
    const Eigen::VectorXd y = WV.colPivHouseholderQr().solve(b);
    x = sub.identifiable_basis * y;
  }
  if (sub.rank < W.cols() && fill.size() == W.cols()) {
    x += sub.unidentifiable_basis * (sub.unidentifiable_basis.transpose() * fill);
  }
  return x;
}

double default_reg_weight(const SubspaceReport& sub) {
  const double smax = sub.singular_values.size() > 0 ? sub.singular_values(0) : 0.0;
  return 1e-3 * smax * smax;
}

}  // namespace

SubspaceReport identifiable_subspace(const Eigen::MatrixXd& W, double threshold) {
  if (W.size() == 0) throw ValidationError("cannot analyse an empty regressor");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeFullV);
  SubspaceReport r;
  r.threshold = threshold;
  r.singular_values = svd.singularValues();
  const double smax = r.singular_values.size() > 0 ? r.singular_values(0) : 0.0;
  r.rank = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) {
      if (r.singular_values(i) > threshold * smax) ++r.rank;
    }
  }
  const Eigen::MatrixXd& V = svd.matrixV();
  r.identifiable_basis = V.leftCols(r.rank);
  r.unidentifiable_basis = V.rightCols(W.cols() - r.rank);
  return r;
}

IdentificationResult ols_identify(const RegressorStack& stack, const ParamVector& prior,
                                  double threshold) {
  require_rows(stack);
  IdentificationResult out;
  out.method = "ols";
  out.subspace = identifiable_subspace(stack.W, threshold);
  if (stack.W.rows() < out.subspace.rank) {
    throw ValidationError("fewer torque equations than identifiable parameters");
  }
  Eigen::VectorXd fill;
  if (prior.size() > 0) {
    if (prior.size() != stack.fixed_values.size()) throw DimensionError("prior size mismatch");
    fill = stack.restrict(prior.values);
  }
  const Eigen::VectorXd b = stack.T - stack.w0;
  const Eigen::VectorXd x = truncated_least_squares(stack.W, b, out.subspace, fill);
  out.alpha_hat = ParamVector(stack.expand(x));
  out.residual = (stack.W * x - b).squaredNorm();
  out.feasibility = feasibility_per_link(out.alpha_hat);
  return out;
}

IdentificationResult consistent_identify(const RegressorStack& stack, const ParamVector& prior,
                                         double reg_weight, const BarrierOptions& options,
                                         double threshold) {
  require_rows(stack);
  if (prior.size() != stack.fixed_values.size()) throw DimensionError("prior size mismatch");
  IdentificationResult out;
  out.method = "consistent";
  out.subspace = identifiable_subspace(stack.W, threshold);
  out.reg_weight = reg_weight < 0.0 ? default_reg_weight(out.subspace) : reg_weight;

  BarrierProblem problem;
  problem.A = stack.W;
  problem.b = stack.T - stack.w0;
  const Eigen::VectorXd x0 = stack.restrict(prior.values);
  if (out.reg_weight > 0.0 && out.subspace.rank < stack.free_count()) {
    problem.R = out.reg_weight * out.subspace.unidentifiable_projector();
    problem.center = x0;
  }

  std::vector<int> column_of(static_cast<std::size_t>(stack.fixed_values.size()), -1);
  for (int c = 0; c < stack.free_count(); ++c) column_of[static_cast<std::size_t>(stack.free_indices[c])] = c;
  const int dof = static_cast<int>(stack.fixed_values.size()) / kParamsPerLink;
  for (int link = 0; link < dof; ++link) {
    const int base = kParamsPerLink * link;
    LmiBlock lmi;
    lmi.name = "pseudo_inertia[" + std::to_string(link) + "]";
    lmi.offset = pseudo_inertia(Eigen::VectorXd(stack.fixed_values.segment(base, kInertialParamsPerLink)));
    for (int k = 0; k < kInertialParamsPerLink; ++k) {
      const int c = column_of[static_cast<std::size_t>(base + k)];
      if (c >= 0) lmi.terms.emplace_back(c, unit_pseudo_inertia(k));
    }
    if (!lmi.terms.empty()) problem.lmis.push_back(std::move(lmi));
    for (int k = kViscous; k <= kRotor; ++k) {
      const int c = column_of[static_cast<std::size_t>(base + k)];
      if (c < 0) continue;
      ScalarBound bound;
      bound.name = std::string(param_name(k)) + "[" + std::to_string(link) + "]";
      bound.terms.emplace_back(c, 1.0);
      problem.bounds.push_back(std::move(bound));
    }
  }

  if (!problem.strictly_feasible(x0)) {
    throw ValidationError("prior is not strictly physically feasible");
  }
  const BarrierResult solved = solve_barrier(problem, x0, options);
  if (!solved.converged) throw SolverError("barrier Newton failure: " + solved.message);
  out.trace = solved.trace;
  out.alpha_hat = ParamVector(stack.expand(solved.x));
  out.residual = (stack.W * solved.x + stack.w0 - stack.T).squaredNorm();
  out.feasibility = feasibility_per_link(out.alpha_hat);
  return out;
}

ParamVector interior_prior(const RobotModel& model) {
  ParamVector prior = pack_params(model);
  for (int i = 0; i < model.dof(); ++i) {
    LinkInertialParams p = prior.link(i);
    if (is_physically_feasible(p, 1e-9).min_eigenvalue <= 1e-9) {
      const double friction[] = {p.viscous_friction, p.coulomb_friction, p.rotor_inertia};
      p = LinkInertialParams::from_com_frame(1.0, Eigen::Vector3d::Zero(),
                                             0.01 * Eigen::Matrix3d::Identity());
      p.viscous_friction = friction[0];
      p.coulomb_friction = friction[1];
      p.rotor_inertia = friction[2];
    }
    p.viscous_friction = std::max(p.viscous_friction, 1e-4);
    p.coulomb_friction = std::max(p.coulomb_friction, 1e-4);
    p.rotor_inertia = std::max(p.rotor_inertia, 1e-4);
    prior.set_link(i, p);
  }
  return prior;
}

std::vector<bool> payload_fixed_mask(int dof, int link) {
  std::vector<bool> mask(static_cast<std::size_t>(kParamsPerLink * dof), true);
  for (int k = 0; k < kInertialParamsPerLink; ++k) {
    mask[static_cast<std::size_t>(kParamsPerLink * link + k)] = false;
  }
  return mask;
}

PayloadResult payload_identify(const RegressorStack& stack, const ParamVector& base_params,
                               int last_link_index, double reg_weight,
                               const BarrierOptions& options) {
  require_rows(stack);
  if (base_params.size() != stack.fixed_values.size()) {
    throw DimensionError("base parameter vector size mismatch");
  }
  const int first = kParamsPerLink * last_link_index;
  bool layout_ok = stack.free_count() == kInertialParamsPerLink;
  for (int k = 0; layout_ok && k < kInertialParamsPerLink; ++k) {
    layout_ok = stack.free_indices[static_cast<std::size_t>(k)] == first + k;
  }
  if (!layout_ok) {
    throw ValidationError("payload stack must free exactly the last link's inertial parameters");
  }

  const Eigen::VectorXd base_last = base_params.values.segment(first, kInertialParamsPerLink);
  const Eigen::VectorXd b = stack.T - stack.w0 - stack.W * base_last;
  const SubspaceReport sub = identifiable_subspace(stack.W);
  const double w = reg_weight < 0.0 ? default_reg_weight(sub) : reg_weight;

  PayloadResult out;
  out.unconstrained_difference =
      unpack_link(truncated_least_squares(stack.W, b, sub, Eigen::VectorXd()));

  BarrierProblem problem;
  problem.A = stack.W;
  problem.b = b;
  if (w > 0.0 && sub.rank < kInertialParamsPerLink) {
    problem.R = w * sub.unidentifiable_projector();
    problem.center = Eigen::VectorXd::Zero(kInertialParamsPerLink);
  }
  LmiBlock object;
  object.name = "object";
  LmiBlock composite;
  composite.name = "composite";
  composite.offset = pseudo_inertia(base_last);
  for (int k = 0; k < kInertialParamsPerLink; ++k) {
    object.terms.emplace_back(k, unit_pseudo_inertia(k));
    composite.terms.emplace_back(k, unit_pseudo_inertia(k));
  }
  problem.lmis = {object, composite};

  // Small compact body at the link origin as the interior starting point.
  const double m0 = 1e-2 * std::max(1.0, std::abs(base_params.values(first + kMass)));
  const LinkInertialParams start =
      LinkInertialParams::from_com_frame(m0, Eigen::Vector3d::Zero(), m0 * 2.5e-3 * Eigen::Matrix3d::Identity());
  const Eigen::VectorXd x0 = pack_link(start).head(kInertialParamsPerLink);
  if (!problem.strictly_feasible(x0)) {
    throw ValidationError("base parameters of the last link are not physically feasible");
  }
  const BarrierResult solved = solve_barrier(problem, x0, options);
  if (!solved.converged) throw SolverError("barrier Newton failure: " + solved.message);

  out.trace = solved.trace;
  out.p = unpack_link(solved.x);
  out.residual = (stack.W * solved.x - b).squaredNorm();
  const Eigen::Matrix4d Jp = pseudo_inertia(out.p);
  out.min_eigenvalue = is_physically_feasible(out.p, 0.0).min_eigenvalue;
  out.composite_min_eigenvalue =
      is_physically_feasible(lump(unpack_link(base_last), out.p), 0.0).min_eigenvalue;
  out.boundary_warning = out.min_eigenvalue <= 1e-8 * std::max(Jp.trace(), 1e-300);
  return out;
}

LinkInertialParams express_in_frame(const LinkInertialParams& p, const Eigen::Isometry3d& frame) {
  // J = ∫ x̃ x̃ᵀ dm transforms with the inverse homogeneous matrix.
  const Eigen::Matrix4d Tinv = frame.inverse().matrix();
  LinkInertialParams out = from_pseudo_inertia(Tinv * pseudo_inertia(p) * Tinv.transpose());
  out.viscous_friction = p.viscous_friction;
  out.coulomb_friction = p.coulomb_friction;
  out.rotor_inertia = p.rotor_inertia;
  return out;
}

ErrorMetrics error_metrics(const LinkInertialParams& estimate, const LinkInertialParams& truth,
                           double char_length) {
  if (!(truth.mass > 0.0)) throw ValidationError("truth mass must be positive");
  if (!(char_length > 0.0)) throw ValidationError("characteristic length must be positive");
  ErrorMetrics m;
  m.mass_pct = 100.0 * std::abs(estimate.mass - truth.mass) / truth.mass;
  const Eigen::Vector3d c_hat =
      estimate.mass != 0.0 ? estimate.com() : Eigen::Vector3d::Zero();
  m.com_pct = 100.0 * (c_hat - truth.com()).norm() / char_length;
  const Eigen::Matrix3d I_true = truth.inertia_about_com();
  const double denom = I_true.norm();
  m.inertia_pct = 100.0 * (estimate.inertia_about_com() - I_true).norm() /
                  (denom > 0.0 ? denom : 1.0);
  return m;
}

const BaseParamSet& select_base_params(const std::vector<BaseParamSet>& sets, double label) {
  if (sets.empty()) throw ValidationError("no base parameter sets available");
  std::size_t best = 0;
  for (std::size_t i = 1; i < sets.size(); ++i) {
    if (std::abs(sets[i].label - label) < std::abs(sets[best].label - label)) best = i;
  }
  return sets[best];
}

}  // namespace physid
