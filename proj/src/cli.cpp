#include "physid/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "physid/errors.hpp"
#include "physid/excite.hpp"
#include "physid/identify.hpp"
#include "physid/io.hpp"
#include "physid/signals.hpp"
#include "physid/simulate.hpp"
#include "physid/urdf.hpp"

namespace fs = std::filesystem;

namespace physid {

namespace {

constexpr const char* kManifest = "manifest.json";

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct ModelArgs {
  std::string model_path;
  std::string fixture;
  double char_length = 0.1;
};

void add_model_options(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--model", m.model_path, "Robot description (URDF subset)");
  cmd->add_option("--fixture", m.fixture, "Built-in fixture instead of a model file")
      ->check(CLI::IsMember(builtin_fixture_names()));
  cmd->add_option("--char-length", m.char_length, "Characteristic length for CoM errors, m")
      ->check(CLI::PositiveNumber);
}

Fixture load_fixture(const ModelArgs& m) {
  if (!m.fixture.empty() && !m.model_path.empty()) {
    throw ValidationError("give either --model or --fixture, not both");
  }
  if (!m.fixture.empty()) return builtin_fixture(m.fixture);
  if (m.model_path.empty()) throw ValidationError("a --model or --fixture is required");
  Fixture f;
  f.model = load_robot_description(m.model_path);
  f.name = f.model.name;
  f.char_length = m.char_length;
  return f;
}

Json model_config(const ModelArgs& m) {
  Json j;
  j["model"] = m.model_path;
  j["fixture"] = m.fixture;
  j["char_length"] = m.char_length;
  return j;
}

/// Adds config, hash and seed to an artifact.
Json stamped(Json body, const Json& config, std::uint64_t seed) {
  Json j;
  j["config"] = config;
  j["config_hash"] = hex64(fnv1a64(config.dump()));
  j["seed"] = seed;
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  return j;
}

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory '" + dir + "'");
}

// design ----------------------------------------------------------------------

struct DesignArgs {
  ModelArgs model;
  double gamma = kDefaultGamma;
  int harmonics = kDefaultHarmonics;
  double omega = kDefaultBaseFrequency;
  double rate = 100.0;
  std::uint64_t seed = 0;
  int outer = 20;
  int budget = 2000;
  int restarts = 2;
  bool full_regressor = false;
  std::string out;
};

int cmd_design(const DesignArgs& a, std::ostream& out) {
  const Fixture fixture = load_fixture(a.model);
  DesignProblem problem;
  problem.model = fixture.model;
  problem.sample_rate = a.rate;
  problem.gamma = a.gamma;
  problem.use_full_regressor = a.full_regressor;
  ALOptions opts;
  opts.seed = a.seed;
  opts.outer_iterations = a.outer;
  opts.subproblem_budget = a.budget;
  opts.restarts = a.restarts;

  Json config;
  config["command"] = "design";
  config["model"] = model_config(a.model);
  config["gamma"] = a.gamma;
  config["harmonics"] = a.harmonics;
  config["omega"] = a.omega;
  config["rate"] = a.rate;
  config["outer_iterations"] = a.outer;
  config["subproblem_budget"] = a.budget;
  config["restarts"] = a.restarts;
  config["full_regressor"] = a.full_regressor;
  config["seed"] = a.seed;

  prepare_out_dir(a.out);
  const DesignResult result = design_trajectory(problem, a.omega, a.harmonics, opts);

  Json provenance;
  provenance["problem_hash"] =
      hex64(fnv1a64(to_robot_description(problem.model) + config.dump()));
  provenance["seed"] = a.seed;
  Json history = Json::array();
  for (const ALIteration& it : result.report.history) history.push_back(it.objective);
  provenance["objective_history"] = history;
  Json traj = to_json(result.trajectory);
  traj["provenance"] = provenance;

  const fs::path dir(a.out);
  write_json_file(dir / "trajectory.json", stamped(traj, config, a.seed));
  write_json_file(dir / "design_report.json", stamped(to_json(result.report), config, a.seed));
  std::ostringstream csv;
  write_trajectory_csv(csv, result.trajectory, a.rate);
  write_text_file(dir / "trajectory.csv", csv.str());

  out << "f_c " << fmt(result.report.initial.f_c) << " -> " << fmt(result.report.final.f_c)
      << ", max violation " << fmt(result.report.constraints.max_violation(), "%.3g") << ", "
      << result.report.evaluations << " evaluations\n";
  if (!result.report.feasible) {
    out << "warning: no feasible trajectory found\n";
    return kExitWarning;
  }
  return kExitOk;
}

// simulate --------------------------------------------------------------------

struct SimulateArgs {
  ModelArgs model;
  std::string traj;
  int trials = 10;
  double noise_rel = 0.0;
  double noise_abs = 0.0;
  double noise_pos = 0.0;
  double rate = 100.0;
  std::uint64_t seed = 0;
  bool payload = false;
  std::string payload_json;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  Fixture fixture = load_fixture(a.model);
  if (!a.payload_json.empty()) {
    fixture.payload = link_params_from_json(read_json_file(a.payload_json));
  } else if (!a.payload) {
    fixture.payload.reset();
  } else if (!fixture.payload) {
    throw ValidationError("fixture '" + fixture.name + "' has no payload");
  }
  if (fixture.payload && !is_physically_feasible(*fixture.payload).feasible) {
    throw ValidationError("payload is not physically feasible");
  }
  const Json traj_json = read_json_file(a.traj);
  const FourierTrajectory traj = trajectory_from_json(traj_json);
  NoiseSpec noise;
  noise.torque_rel_std = a.noise_rel;
  noise.torque_abs_std = a.noise_abs;
  noise.position_std = a.noise_pos;
  noise.seed = a.seed;

  Json config;
  config["command"] = "simulate";
  config["model"] = model_config(a.model);
  config["traj"] = a.traj;
  config["trials"] = a.trials;
  config["rate"] = a.rate;
  config["noise"] = to_json(noise);
  config["payload"] = a.payload;
  config["payload_json"] = a.payload_json;
  config["seed"] = a.seed;

  prepare_out_dir(a.out);
  const std::vector<RawTrial> trials = generate_dataset(fixture, traj, a.rate, a.trials, noise);
  const fs::path dir(a.out);
  Json files = Json::array();
  for (std::size_t k = 0; k < trials.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "trial_%03zu.csv", k);
    std::ostringstream csv;
    write_trial_csv(csv, trials[k]);
    write_text_file(dir / name, csv.str());
    files.push_back(name);
  }

  Json truth;
  truth["params"] = to_json(pack_params(fixture.model));
  if (fixture.payload) truth["payload"] = to_json(*fixture.payload);
  Json body;
  body["fixture"] = fixture.name;
  body["model_description"] = to_robot_description(fixture.model);
  body["model_summary"] = model_summary(fixture.model);
  body["truth"] = truth;
  body["char_length"] = fixture.char_length;
  body["noise"] = to_json(noise);
  body["rate"] = a.rate;
  body["trajectory"] = to_json(traj);
  body["files"] = files;
  write_json_file(dir / kManifest, stamped(body, config, a.seed));
  out << trials.size() << " trials of " << trials.front().samples() << " samples written to "
      << a.out << "\n";
  return kExitOk;
}

// identify --------------------------------------------------------------------

struct Dataset {
  Json manifest;
  RobotModel model;
  RawTrial averaged;
  std::size_t trial_count = 0;
};

Dataset load_dataset(const std::string& dir, const std::string& model_path) {
  Dataset d;
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw Error("data directory '" + dir + "' does not exist");
  d.manifest = read_json_file(root / kManifest);
  if (!model_path.empty()) {
    d.model = load_robot_description(model_path);
  } else if (d.manifest.contains("model_description")) {
    d.model = parse_robot_description(d.manifest.at("model_description").get<std::string>());
  } else {
    throw ValidationError("no --model given and the manifest carries no model description");
  }
  if (!d.manifest.contains("files") || d.manifest.at("files").empty()) {
    throw ValidationError("manifest lists no trial files");
  }
  std::vector<RawTrial> trials;
  for (const auto& f : d.manifest.at("files")) {
    const fs::path p = root / f.get<std::string>();
    std::ifstream in(p);
    if (!in) throw Error("cannot open '" + p.string() + "'");
    try {
      trials.push_back(read_trial_csv(in));
    } catch (const ParseError& e) {
      throw ParseError(p.string() + ": " + e.what(), e.line());
    }
    if (trials.back().dof() != d.model.dof()) {
      throw DimensionError(p.string() + ": joint count does not match the model");
    }
  }
  d.averaged = average_trials(trials);
  d.trial_count = trials.size();
  return d;
}

std::optional<CutoffPair> parse_cutoff_pair(const std::string& spec) {
  if (spec == "auto") return std::nullopt;
  if (spec == "none") return CutoffPair{0.0, 0.0};
  const auto comma = spec.find(',');
  try {
    if (comma == std::string::npos) {
      const double v = std::stod(spec);
      return CutoffPair{v, v};
    }
    return CutoffPair{std::stod(spec.substr(0, comma)), std::stod(spec.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ValidationError("--cutoffs expects auto, none, HZ or POS_HZ,TORQUE_HZ");
  }
}

std::optional<double> as_cutoff(double hz) {
  if (hz > 0.0) return hz;
  return std::nullopt;
}

struct IdentifyArgs {
  std::string mode = "robot";
  std::string data;
  std::string model;
  std::string base_params;
  double label = 0.0;
  std::string cutoffs = "auto";
  double reg = -1.0;
  std::string out;
};

int cmd_identify(const IdentifyArgs& a, std::ostream& out) {
  if (a.mode == "payload" && a.base_params.empty()) {
    throw ValidationError("payload mode requires --base-params");
  }
  const Dataset d = load_dataset(a.data, a.model);
  const std::uint64_t seed = d.manifest.value("seed", std::uint64_t{0});
  Json config;
  config["command"] = "identify";
  config["mode"] = a.mode;
  config["data"] = a.data;
  config["data_config_hash"] = d.manifest.value("config_hash", std::string());
  config["model"] = a.model;
  config["base_params"] = a.base_params;
  config["label"] = a.label;
  config["cutoffs"] = a.cutoffs;
  config["reg"] = a.reg;

  std::optional<BaseParamSet> base;
  if (a.mode == "payload") {
    base = select_base_params(base_param_sets_from_json(read_json_file(a.base_params)), a.label);
    if (base->params.size() != d.model.param_count()) {
      throw DimensionError("base parameters do not match the model size");
    }
  }

  std::optional<CutoffPair> cut = parse_cutoff_pair(a.cutoffs);
  Json cutoff_json;
  if (cut) {
    cutoff_json["source"] = "given";
  } else if (base && base->cutoffs) {
    // Same processing as the base estimate, so filter bias cancels in the difference.
    cut = base->cutoffs;
    cutoff_json["source"] = "base_params";
  } else {
    // Unfiltered classes compete with the grid; they win on clean signals.
    const CutoffSearchResult search =
        tune_filter_cutoffs(d.averaged, d.model, cutoff_grid_with_unfiltered());
    cut = search.best;
    cutoff_json["source"] = "tuned";
    cutoff_json["best_residual"] = search.best_residual;
  }
  cutoff_json["position_hz"] = cut->position;
  cutoff_json["torque_hz"] = cut->torque;
  const ProcessedDataset data = process_trial(d.averaged, as_cutoff(cut->position), as_cutoff(cut->torque));

  prepare_out_dir(a.out);
  const fs::path dir(a.out);
  const Json truth = d.manifest.value("truth", Json());
  const double char_length = d.manifest.value("char_length", 0.1);
  std::ostringstream metrics;
  metrics << "method,link,mass_pct,com_pct,inertia_pct\n";
  auto metric_row = [&](const std::string& method, int link, const ErrorMetrics& m) {
    metrics << method << ',' << link << ',' << fmt(m.mass_pct) << ',' << fmt(m.com_pct) << ','
            << fmt(m.inertia_pct) << '\n';
  };
  const int n = d.model.dof();
  bool warn = false;
  Json body;
  body["trials"] = d.trial_count;
  body["cutoffs"] = cutoff_json;

  if (a.mode == "robot") {
    const RegressorStack stack = stack_regressor(d.model, data.states, data.torques);
    const ParamVector prior = interior_prior(d.model);
    const IdentificationResult ols = ols_identify(stack, prior);
    const IdentificationResult lmi = consistent_identify(stack, prior, a.reg);
    warn = !lmi.converged;
    body["ols"] = to_json(ols);
    body["consistent"] = to_json(lmi);

    if (truth.contains("params")) {
      ParamVector simulated = param_vector_from_json(truth.at("params"));
      if (simulated.size() != d.model.param_count()) {
        throw DimensionError("manifest truth does not match the model size");
      }
      if (truth.contains("payload")) {
        simulated.set_link(n - 1, lump(simulated.link(n - 1), link_params_from_json(truth.at("payload"))));
      }
      const Eigen::MatrixXd& V = lmi.subspace.identifiable_basis;
      const double denom = (V.transpose() * simulated.values).norm();
      for (const IdentificationResult* r : {&ols, &lmi}) {
        body[r->method]["identifiable_relative_error"] =
            (V.transpose() * (r->alpha_hat.values - simulated.values)).norm() / denom;
        for (int l = 0; l < n; ++l) {
          metric_row(r->method, l, error_metrics(r->alpha_hat.link(l), simulated.link(l), char_length));
        }
      }
      write_text_file(dir / "metrics.csv", metrics.str());
    }
    Json sets;
    sets["sets"] = to_json(std::vector<BaseParamSet>{{a.label, lmi.alpha_hat, *cut}});
    write_json_file(dir / "base_params.json", stamped(sets, config, seed));
    out << "consistent residual " << fmt(lmi.residual) << ", OLS residual " << fmt(ols.residual)
        << ", rank " << lmi.subspace.rank << "\n";
  } else {
    const RegressorStack stack = stack_regressor(d.model, data.states, data.torques,
                                                 payload_fixed_mask(n, n - 1), base->params);
    const PayloadResult p = payload_identify(stack, base->params, n - 1, a.reg);
    warn = p.boundary_warning || !p.converged;
    body["base_label"] = base->label;
    body["payload"] = to_json(p);
    if (truth.contains("payload")) {
      const LinkInertialParams t = link_params_from_json(truth.at("payload"));
      const ErrorMetrics m = error_metrics(p.p, t, char_length);
      body["payload"]["metrics"] = to_json(m);
      metric_row("payload", n - 1, m);
      if (p.unconstrained_difference.mass > 0.0) {
        metric_row("difference", n - 1, error_metrics(p.unconstrained_difference, t, char_length));
      }
      write_text_file(dir / "metrics.csv", metrics.str());
    }
    out << "object mass " << fmt(p.p.mass) << " kg, min eigenvalue " << fmt(p.min_eigenvalue, "%.3g")
        << (p.boundary_warning ? " (near the feasibility boundary)" : "") << "\n";
  }
  write_json_file(dir / "result.json", stamped(body, config, seed));
  return warn ? kExitWarning : kExitOk;
}

// tune-filters ----------------------------------------------------------------

struct TuneArgs {
  std::string data;
  std::string model;
  std::string grid = "default";
  std::string out;
};

std::vector<CutoffPair> parse_grid(const std::string& spec) {
  if (spec == "default") return default_cutoff_grid();
  // 0 stands for no filtering.
  std::vector<double> hz;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      hz.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("--grid expects 'default' or a comma-separated list of Hz");
    }
  }
  std::vector<CutoffPair> grid;
  for (double p : hz) {
    for (double t : hz) grid.push_back({p, t});
  }
  return grid;
}

int cmd_tune(const TuneArgs& a, std::ostream& out) {
  const Dataset d = load_dataset(a.data, a.model);
  const CutoffSearchResult r = tune_filter_cutoffs(d.averaged, d.model, parse_grid(a.grid));
  std::ostringstream csv;
  csv << "position_hz,torque_hz,ok,residual\n";
  for (const CutoffEvaluation& e : r.table) {
    csv << fmt(e.cutoffs.position) << ',' << fmt(e.cutoffs.torque) << ',' << (e.ok ? 1 : 0) << ','
        << (e.ok ? fmt(e.residual, "%.17g") : std::string("nan")) << '\n';
  }
  if (!a.out.empty()) {
    write_text_file(a.out, csv.str());
  } else {
    out << csv.str();
  }
  out << "best position_hz=" << fmt(r.best.position) << " torque_hz=" << fmt(r.best.torque)
      << " residual=" << fmt(r.best_residual) << "\n";
  return kExitOk;
}

// report ----------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  using Key = std::pair<std::string, int>;
  std::map<Key, std::vector<std::array<double, 3>>> rows;
  for (const std::string& run : a.runs) {
    const fs::path p = fs::path(run) / "metrics.csv";
    std::istringstream in(read_text_file(p));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (lineno == 1 || line.empty()) continue;
      std::stringstream ls(line);
      std::string method, link, c[3];
      std::getline(ls, method, ',');
      std::getline(ls, link, ',');
      std::array<double, 3> v{};
      try {
        for (int k = 0; k < 3; ++k) {
          if (!std::getline(ls, c[k], ',')) throw std::invalid_argument("short row");
          v[static_cast<std::size_t>(k)] = std::stod(c[k]);
        }
        rows[{method, std::stoi(link)}].push_back(v);
      } catch (const std::exception&) {
        throw ParseError(p.string() + ": bad metrics row " + std::to_string(lineno), lineno);
      }
    }
  }
  std::ostringstream csv;
  csv << "method,link,runs,mass_pct_mean,mass_pct_std,com_pct_mean,com_pct_std,inertia_pct_mean,"
         "inertia_pct_std\n";
  for (const auto& [key, vals] : rows) {
    csv << key.first << ',' << key.second << ',' << vals.size();
    for (std::size_t k = 0; k < 3; ++k) {
      double mean = 0.0;
      for (const auto& v : vals) mean += v[k];
      mean /= static_cast<double>(vals.size());
      double var = 0.0;
      for (const auto& v : vals) var += (v[k] - mean) * (v[k] - mean);
      const double sd = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
      csv << ',' << fmt(mean) << ',' << fmt(sd);
    }
    csv << '\n';
  }
  if (!a.out.empty()) {
    write_text_file(a.out, csv.str());
  } else {
    out << csv.str();
  }
  return kExitOk;
}

// export-fixture --------------------------------------------------------------

int cmd_export(const std::string& name, const std::string& path, const std::string& payload_path,
               std::ostream& out) {
  const Fixture f = builtin_fixture(name);
  write_text_file(path, to_robot_description(f.model));
  if (!payload_path.empty()) {
    if (!f.payload) throw ValidationError("fixture '" + name + "' has no payload");
    write_json_file(payload_path, to_json(*f.payload));
  }
  out << "wrote " << path << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inertial parameter identification pipeline", "physid"};
  app.require_subcommand(1);

  DesignArgs design;
  CLI::App* design_cmd = app.add_subcommand("design", "Optimize an excitation trajectory");
  add_model_options(design_cmd, design.model);
  design_cmd->add_option("--gamma", design.gamma, "Weight of the E-optimality term")
      ->check(CLI::NonNegativeNumber);
  design_cmd->add_option("--harmonics", design.harmonics)->check(CLI::PositiveNumber);
  design_cmd->add_option("--omega", design.omega, "Base frequency, rad/s")->check(CLI::PositiveNumber);
  design_cmd->add_option("--rate", design.rate, "Sampling rate of the objective, Hz")
      ->check(CLI::PositiveNumber);
  design_cmd->add_option("--seed", design.seed);
  design_cmd->add_option("--outer-iterations", design.outer)->check(CLI::PositiveNumber);
  design_cmd->add_option("--budget", design.budget, "Evaluations per subproblem")
      ->check(CLI::PositiveNumber);
  design_cmd->add_option("--restarts", design.restarts)->check(CLI::NonNegativeNumber);
  design_cmd->add_flag("--full-regressor", design.full_regressor,
                       "Use all 13N columns instead of the identifiable subspace");
  design_cmd->add_option("--out", design.out)->required();

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate synthetic measurements");
  add_model_options(sim_cmd, sim.model);
  sim_cmd->add_option("--traj", sim.traj, "Trajectory JSON")->required();
  sim_cmd->add_option("--trials", sim.trials)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--noise-rel", sim.noise_rel)->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--noise-abs", sim.noise_abs)->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--noise-pos", sim.noise_pos)->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--rate", sim.rate)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed);
  sim_cmd->add_flag("--payload", sim.payload, "Attach the fixture's payload to the last link");
  sim_cmd->add_option("--payload-json", sim.payload_json, "Payload parameters to attach");
  sim_cmd->add_option("--out", sim.out)->required();

  IdentifyArgs id;
  CLI::App* id_cmd = app.add_subcommand("identify", "Identify robot or payload parameters");
  id_cmd->add_option("--mode", id.mode)->check(CLI::IsMember({"robot", "payload"}));
  id_cmd->add_option("--data", id.data)->required();
  id_cmd->add_option("--model", id.model, "Nominal model; defaults to the dataset manifest");
  id_cmd->add_option("--base-params", id.base_params);
  id_cmd->add_option("--label", id.label, "Gripper configuration label of the base set");
  id_cmd->add_option("--cutoffs", id.cutoffs, "auto (tuned; the base set's in payload mode), none, HZ or POS_HZ,TORQUE_HZ");
  id_cmd->add_option("--reg", id.reg, "Regularization weight; negative selects the default");
  id_cmd->add_option("--out", id.out)->required();

  TuneArgs tune;
  CLI::App* tune_cmd = app.add_subcommand("tune-filters", "Grid-search filter cutoffs");
  tune_cmd->add_option("--data", tune.data)->required();
  tune_cmd->add_option("--model", tune.model);
  tune_cmd->add_option("--grid", tune.grid, "default or a comma-separated list of Hz");
  tune_cmd->add_option("--out", tune.out, "CSV table; stdout when omitted");

  ReportArgs report;
  CLI::App* report_cmd = app.add_subcommand("report", "Aggregate metrics over runs");
  report_cmd->add_option("--runs", report.runs)->required()->expected(1, -1);
  report_cmd->add_option("--out", report.out, "CSV file; stdout when omitted");

  std::string export_name, export_out, export_payload;
  CLI::App* export_cmd = app.add_subcommand("export-fixture", "Write a built-in fixture as a model file");
  export_cmd->add_option("--name", export_name)->required()->check(CLI::IsMember(builtin_fixture_names()));
  export_cmd->add_option("--out", export_out)->required();
  export_cmd->add_option("--payload-out", export_payload, "Also write the payload parameters as JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*design_cmd) return cmd_design(design, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*id_cmd) return cmd_identify(id, out);
    if (*tune_cmd) return cmd_tune(tune, out);
    if (*report_cmd) return cmd_report(report, out);
    if (*export_cmd) return cmd_export(export_name, export_out, export_payload, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace physid
