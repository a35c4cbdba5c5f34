#include "physid/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "physid/errors.hpp"

namespace physid {

namespace {

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json mat(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
  return rows;
}

Eigen::VectorXd vec_from(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(std::string(what) + " must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd mat_from(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array of rows");
  if (j.empty()) return Eigen::MatrixXd();
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Eigen::VectorXd row = vec_from(j[r], what);
    if (row.size() != cols) throw DimensionError(std::string(what) + " rows differ in length");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json model_summary(const RobotModel& model) {
  Json j;
  j["name"] = model.name;
  j["dof"] = model.dof();
  j["gravity"] = vec(model.gravity);
  Json joints = Json::array();
  for (const Link& l : model.links) {
    Json e;
    e["joint"] = l.joint.name;
    e["link"] = l.link_name;
    e["axis"] = vec(l.joint.axis);
    e["position_limits"] = {l.joint.position_lower, l.joint.position_upper};
    e["velocity_limit"] = l.joint.velocity_limit;
    e["acceleration_limit"] = l.joint.acceleration_limit;
    joints.push_back(e);
  }
  j["joints"] = joints;
  j["params"] = to_json(pack_params(model));
  return j;
}

Json to_json(const LinkInertialParams& p) {
  Json j;
  j["mass"] = p.mass;
  j["first_moment"] = vec(p.first_moment);
  j["inertia"] = mat(p.inertia);
  j["viscous_friction"] = p.viscous_friction;
  j["coulomb_friction"] = p.coulomb_friction;
  j["rotor_inertia"] = p.rotor_inertia;
  return j;
}

LinkInertialParams link_params_from_json(const Json& j) {
  LinkInertialParams p;
  p.mass = field(j, "mass").get<double>();
  const Eigen::VectorXd h = vec_from(field(j, "first_moment"), "first_moment");
  const Eigen::MatrixXd I = mat_from(field(j, "inertia"), "inertia");
  if (h.size() != 3 || I.rows() != 3 || I.cols() != 3) {
    throw DimensionError("first_moment must have 3 entries and inertia 3x3");
  }
  p.first_moment = h;
  p.inertia = I;
  p.viscous_friction = j.value("viscous_friction", 0.0);
  p.coulomb_friction = j.value("coulomb_friction", 0.0);
  p.rotor_inertia = j.value("rotor_inertia", 0.0);
  return p;
}

Json to_json(const ParamVector& p) { return vec(p.values); }

ParamVector param_vector_from_json(const Json& j) {
  ParamVector p(vec_from(j, "parameter vector"));
  if (p.size() % kParamsPerLink != 0) {
    throw DimensionError("parameter vector length is not a multiple of 13");
  }
  return p;
}

Json to_json(const FourierTrajectory& t) {
  Json j;
  j["omega"] = t.omega;
  j["harmonics"] = t.harmonics;
  j["duration"] = t.duration;
  j["q0"] = vec(t.q0);
  j["a"] = mat(t.a);
  j["b"] = mat(t.b);
  return j;
}

FourierTrajectory trajectory_from_json(const Json& j) {
  const double omega = field(j, "omega").get<double>();
  const int harmonics = field(j, "harmonics").get<int>();
  if (!(omega > 0.0) || harmonics < 1) {
    throw ValidationError("trajectory needs omega > 0 and at least one harmonic");
  }
  const Eigen::VectorXd q0 = vec_from(field(j, "q0"), "q0");
  FourierTrajectory t = FourierTrajectory::zeros(static_cast<int>(q0.size()), omega, harmonics);
  t.q0 = q0;
  t.a = mat_from(field(j, "a"), "a");
  t.b = mat_from(field(j, "b"), "b");
  if (t.a.rows() != q0.size() || t.b.rows() != q0.size() || t.a.cols() != harmonics ||
      t.b.cols() != harmonics) {
    throw DimensionError("trajectory coefficient shapes disagree");
  }
  t.duration = j.value("duration", t.period());
  return t;
}

Json to_json(const InformationValue& v) {
  Json j;
  j["value"] = v.value;
  j["f_c"] = v.f_c;
  j["f_e"] = v.f_e;
  j["lambda_min"] = v.lambda_min;
  j["lambda_max"] = v.lambda_max;
  return j;
}

Json to_json(const ConstraintRecord& r) {
  Json j;
  Json eq = Json::object();
  for (const NamedValue& v : r.equalities) eq[v.name] = v.value;
  Json in = Json::object();
  for (const NamedValue& v : r.inequalities) in[v.name] = v.value;
  j["equalities"] = eq;
  j["inequalities"] = in;
  j["max_violation"] = r.max_violation();
  return j;
}

Json to_json(const DesignReport& r) {
  Json j;
  j["initial"] = to_json(r.initial);
  j["final"] = to_json(r.final);
  j["feasible"] = r.feasible;
  j["evaluations"] = r.evaluations;
  j["identifiable_rank"] = r.rank;
  j["constraints"] = to_json(r.constraints);
  Json h = Json::array();
  for (const ALIteration& it : r.history) {
    Json e;
    e["iteration"] = it.iteration;
    e["penalty"] = it.penalty;
    e["objective"] = it.objective;
    e["infeasibility"] = it.infeasibility;
    e["lagrangian"] = it.lagrangian;
    e["evaluations"] = it.evaluations;
    h.push_back(e);
  }
  j["history"] = h;
  return j;
}

Json to_json(const FeasibilityReport& r) {
  Json j;
  j["feasible"] = r.feasible;
  j["min_eigenvalue"] = r.min_eigenvalue;
  j["min_friction"] = r.min_friction;
  j["margin"] = r.margin;
  j["binding"] = r.binding;
  return j;
}

Json to_json(const SubspaceReport& s) {
  Json j;
  j["rank"] = s.rank;
  j["threshold"] = s.threshold;
  j["singular_values"] = vec(s.singular_values);
  return j;
}

Json to_json(const std::vector<BarrierStage>& trace) {
  Json a = Json::array();
  for (const BarrierStage& s : trace) {
    Json e;
    e["mu"] = s.mu;
    e["objective"] = s.objective;
    e["barrier_objective"] = s.barrier_objective;
    e["newton_iterations"] = s.newton_iterations;
    e["decrement"] = s.decrement;
    a.push_back(e);
  }
  return a;
}

Json to_json(const IdentificationResult& r) {
  Json j;
  j["method"] = r.method;
  j["converged"] = r.converged;
  j["residual"] = r.residual;
  j["reg_weight"] = r.reg_weight;
  j["alpha_hat"] = to_json(r.alpha_hat);
  Json links = Json::array();
  for (int l = 0; l < r.alpha_hat.dof(); ++l) {
    Json e = to_json(r.alpha_hat.link(l));
    if (l < static_cast<int>(r.feasibility.size())) e["feasibility"] = to_json(r.feasibility[l]);
    links.push_back(e);
  }
  j["links"] = links;
  j["subspace"] = to_json(r.subspace);
  j["trace"] = to_json(r.trace);
  return j;
}

Json to_json(const PayloadResult& r) {
  Json j;
  j["object"] = to_json(r.p);
  j["object_frame"] = r.object_frame;
  j["min_eigenvalue"] = r.min_eigenvalue;
  j["composite_min_eigenvalue"] = r.composite_min_eigenvalue;
  j["residual"] = r.residual;
  j["boundary_warning"] = r.boundary_warning;
  j["converged"] = r.converged;
  j["unconstrained_difference"] = to_json(r.unconstrained_difference);
  j["trace"] = to_json(r.trace);
  return j;
}

Json to_json(const ErrorMetrics& m) {
  Json j;
  j["mass_pct"] = m.mass_pct;
  j["com_pct"] = m.com_pct;
  j["inertia_pct"] = m.inertia_pct;
  return j;
}

Json to_json(const NoiseSpec& n) {
  Json j;
  j["torque_abs_std"] = n.torque_abs_std;
  j["torque_rel_std"] = n.torque_rel_std;
  j["position_std"] = n.position_std;
  j["seed"] = n.seed;
  return j;
}

NoiseSpec noise_from_json(const Json& j) {
  NoiseSpec n;
  n.torque_abs_std = j.value("torque_abs_std", 0.0);
  n.torque_rel_std = j.value("torque_rel_std", 0.0);
  n.position_std = j.value("position_std", 0.0);
  n.seed = j.value("seed", std::uint64_t{0});
  return n;
}

Json to_json(const std::vector<BaseParamSet>& sets) {
  Json a = Json::array();
  for (const BaseParamSet& s : sets) {
    Json e;
    e["label"] = s.label;
    e["params"] = to_json(s.params);
    if (s.cutoffs) {
      e["cutoffs"] = {{"position_hz", s.cutoffs->position}, {"torque_hz", s.cutoffs->torque}};
    }
    a.push_back(e);
  }
  return a;
}

std::vector<BaseParamSet> base_param_sets_from_json(const Json& j) {
  const Json& arr = j.is_object() ? field(j, "sets") : j;
  if (!arr.is_array() || arr.empty()) throw ValidationError("no base parameter sets");
  std::vector<BaseParamSet> out;
  for (const Json& e : arr) {
    BaseParamSet s;
    s.label = e.value("label", 0.0);
    s.params = param_vector_from_json(field(e, "params"));
    if (e.contains("cutoffs")) {
      const Json& c = e.at("cutoffs");
      s.cutoffs = CutoffPair{field(c, "position_hz").get<double>(), field(c, "torque_hz").get<double>()};
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const FourierTrajectory& traj, double rate) {
  const int n = traj.dof();
  out << "t";
  for (const char* p : {"q", "qd", "qdd"}) {
    for (int i = 1; i <= n; ++i) out << ',' << p << '_' << i;
  }
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (double t : sample_times(traj.duration, rate)) {
    const JointState s = fourier_eval(traj, t);
    put(t);
    for (const Eigen::VectorXd* v : {&s.q, &s.qd, &s.qdd}) {
      for (int i = 0; i < n; ++i) {
        out << ',';
        put((*v)(i));
      }
    }
    out << '\n';
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Byte offset to line number for the message.
    const std::size_t upto = std::min(e.byte, text.size());
    const int line =
        1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw ParseError(path.string() + ": malformed JSON", line);
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace physid
