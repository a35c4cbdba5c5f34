#include "physid/signals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

#include "physid/errors.hpp"
#include "physid/identify.hpp"

namespace physid {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;
};

Biquad butterworth_lowpass(double cutoff, double rate) {
  const double k = std::tan(std::numbers::pi * cutoff / rate);
  const double k2 = k * k;
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k2);
  Biquad f;
  f.b0 = k2 * norm;
  f.b1 = 2.0 * f.b0;
  f.b2 = f.b0;
  f.a1 = 2.0 * (k2 - 1.0) * norm;
  f.a2 = (1.0 - std::numbers::sqrt2 * k + k2) * norm;
  return f;
}

// Direct form II transposed, starting from the steady state of a constant
// input equal to x[0].
void run_biquad(const Biquad& f, std::vector<double>& x) {
  if (x.empty()) return;
  double z1 = (1.0 - f.b0) * x.front();
  double z2 = (f.b2 - f.a2) * x.front();
  for (double& v : x) {
    const double in = v;
    const double out = f.b0 * in + z1;
    z1 = f.b1 * in - f.a1 * out + z2;
    z2 = f.b2 * in - f.a2 * out;
    v = out;
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double RawTrial::sample_rate() const {
  if (timestamps.size() < 2) return 0.0;
  return static_cast<double>(timestamps.size() - 1) / (timestamps(timestamps.size() - 1) - timestamps(0));
}

void validate_trial(const RawTrial& trial) {
  const Eigen::Index s = trial.timestamps.size();
  if (s < 16) throw ValidationError("trial needs at least 16 samples, got " + std::to_string(s));
  if (trial.q.rows() != s || trial.tau.rows() != s || trial.q.cols() != trial.tau.cols() ||
      trial.q.cols() == 0) {
    throw ValidationError("trial position/torque dimensions do not match timestamps");
  }
  const double dt = (trial.timestamps(s - 1) - trial.timestamps(0)) / static_cast<double>(s - 1);
  if (!(dt > 0.0)) throw ValidationError("trial timestamps are not increasing");
  for (Eigen::Index k = 0; k < s; ++k) {
    const double expected = trial.timestamps(0) + dt * static_cast<double>(k);
    if (std::abs(trial.timestamps(k) - expected) >= 1e-6) {
      throw ValidationError("trial is not uniformly sampled at row " + std::to_string(k));
    }
  }
  if (!trial.q.allFinite() || !trial.tau.allFinite()) {
    throw ValidationError("trial contains non-finite samples");
  }
}

Eigen::VectorXd lowpass_zero_phase(const Eigen::VectorXd& x, double cutoff, double rate) {
  if (!(rate > 0.0) || !(cutoff > 0.0) || !(cutoff < rate / 2.0)) {
    throw ValidationError("cutoff " + format_double(cutoff) + " Hz outside (0, " +
                          format_double(rate / 2.0) + ") Hz");
  }
  const Eigen::Index n = x.size();
  if (n < 2) return x;
  const Biquad f = butterworth_lowpass(cutoff, rate);

  // Odd reflection about both end points keeps value and slope continuous.
  const auto wanted = static_cast<Eigen::Index>(std::ceil(3.0 * rate / cutoff));
  const Eigen::Index pad = std::min<Eigen::Index>(n - 1, std::max<Eigen::Index>(9, wanted));
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(n + 2 * pad));
  for (Eigen::Index k = pad; k >= 1; --k) buf.push_back(2.0 * x(0) - x(k));
  for (Eigen::Index k = 0; k < n; ++k) buf.push_back(x(k));
  for (Eigen::Index k = 1; k <= pad; ++k) buf.push_back(2.0 * x(n - 1) - x(n - 1 - k));

  run_biquad(f, buf);
  std::reverse(buf.begin(), buf.end());
  run_biquad(f, buf);
  std::reverse(buf.begin(), buf.end());

  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) y(k) = buf[static_cast<std::size_t>(k + pad)];
  return y;
}

Eigen::MatrixXd lowpass_zero_phase(const Eigen::MatrixXd& x, double cutoff, double rate) {
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    y.col(c) = lowpass_zero_phase(Eigen::VectorXd(x.col(c)), cutoff, rate);
  }
  return y;
}

Eigen::MatrixXd central_derivative(const Eigen::MatrixXd& x, double rate) {
  const Eigen::Index s = x.rows();
  if (s < 5) throw ValidationError("differentiation needs at least 5 samples");
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(s, x.cols(), std::numeric_limits<double>::quiet_NaN());
  const double scale = rate / 12.0;
  for (Eigen::Index k = kDerivativeTrim; k < s - kDerivativeTrim; ++k) {
    d.row(k) = scale * (x.row(k - 2) - 8.0 * x.row(k - 1) + 8.0 * x.row(k + 1) - x.row(k + 2));
  }
  return d;
}

Derivatives differentiate_twice(const Eigen::MatrixXd& q, double rate) {
  if (q.rows() < 5) throw ValidationError("differentiation needs at least 5 samples");
  if (!(rate > 0.0)) throw ValidationError("sample rate must be positive");
  Derivatives out;
  out.qd = central_derivative(q, rate);
  out.qdd = Eigen::MatrixXd::Constant(q.rows(), q.cols(), std::numeric_limits<double>::quiet_NaN());
  const Eigen::Index valid = q.rows() - 2 * kDerivativeTrim;
  if (valid >= 5) {
    out.qdd.middleRows(kDerivativeTrim, valid) =
        central_derivative(out.qd.middleRows(kDerivativeTrim, valid), rate);
  }
  return out;
}

RawTrial average_trials(const std::vector<RawTrial>& trials) {
  if (trials.empty()) throw ValidationError("no trials to average");
  const RawTrial& first = trials.front();
  RawTrial out = first;
  for (std::size_t k = 1; k < trials.size(); ++k) {
    const RawTrial& t = trials[k];
    if (t.timestamps.size() != first.timestamps.size() || t.q.rows() != first.q.rows() ||
        t.q.cols() != first.q.cols() || t.tau.cols() != first.tau.cols() ||
        (t.timestamps - first.timestamps).cwiseAbs().maxCoeff() >= 1e-6) {
      throw ValidationError("trial " + std::to_string(k) + " is on a different grid");
    }
    out.q += t.q;
    out.tau += t.tau;
  }
  const double inv = 1.0 / static_cast<double>(trials.size());
  out.q *= inv;
  out.tau *= inv;
  return out;
}

ProcessedDataset process_trial(const RawTrial& trial, std::optional<double> position_cutoff,
                               std::optional<double> torque_cutoff) {
  validate_trial(trial);
  const double rate = trial.sample_rate();
  const Eigen::Index s = trial.samples();
  auto filter = [&](const Eigen::MatrixXd& x, std::optional<double> cutoff) {
    return cutoff ? lowpass_zero_phase(x, *cutoff, rate) : x;
  };

  const Eigen::MatrixXd q = filter(trial.q, position_cutoff);
  const Eigen::Index n1 = s - 2 * kDerivativeTrim;
  const Eigen::MatrixXd qd =
      filter(central_derivative(q, rate).middleRows(kDerivativeTrim, n1), position_cutoff);
  const Eigen::Index n2 = n1 - 2 * kDerivativeTrim;
  const Eigen::MatrixXd qdd =
      filter(central_derivative(qd, rate).middleRows(kDerivativeTrim, n2), position_cutoff);
  const Eigen::MatrixXd tau = filter(trial.tau, torque_cutoff);

  ProcessedDataset out;
  out.sample_rate = rate;
  out.position_cutoff = position_cutoff.value_or(0.0);
  out.torque_cutoff = torque_cutoff.value_or(0.0);
  const Eigen::Index offset = 2 * kDerivativeTrim;
  out.timestamps = trial.timestamps.segment(offset, n2);
  out.states.reserve(static_cast<std::size_t>(n2));
  out.torques.reserve(static_cast<std::size_t>(n2));
  for (Eigen::Index k = 0; k < n2; ++k) {
    JointState st;
    st.q = q.row(k + offset).transpose();
    st.qd = qd.row(k + kDerivativeTrim).transpose();
    st.qdd = qdd.row(k).transpose();
    out.states.push_back(std::move(st));
    out.torques.push_back(tau.row(k + offset).transpose());
  }
  return out;
}

namespace {

std::vector<CutoffPair> product_grid(const std::vector<double>& values) {
  std::vector<CutoffPair> grid;
  for (double p : values) {
    for (double t : values) grid.push_back({p, t});
  }
  return grid;
}

}  // namespace

std::vector<CutoffPair> default_cutoff_grid() { return product_grid({2, 4, 6, 8, 10, 15, 20}); }

std::vector<CutoffPair> cutoff_grid_with_unfiltered() {
  return product_grid({0, 2, 4, 6, 8, 10, 15, 20});
}

CutoffSearchResult tune_filter_cutoffs(const RawTrial& trial, const RobotModel& model,
                                       const std::vector<CutoffPair>& grid) {
  if (grid.empty()) throw ValidationError("cutoff grid is empty");
  const ParamVector prior = interior_prior(model);
  CutoffSearchResult result;
  result.table.reserve(grid.size());
  int best = -1;
  for (const CutoffPair& c : grid) {
    CutoffEvaluation e;
    e.cutoffs = c;
    try {
      auto cutoff = [](double hz) { return hz > 0.0 ? std::optional<double>(hz) : std::nullopt; };
      const ProcessedDataset data = process_trial(trial, cutoff(c.position), cutoff(c.torque));
      const RegressorStack stack = stack_regressor(model, data.states, data.torques);
      const IdentificationResult id = consistent_identify(stack, prior);
      e.residual = id.residual;
      e.ok = std::isfinite(e.residual);
      if (!e.ok) e.error = "non-finite residual";
    } catch (const Error& ex) {
      e.error = ex.what();
    }
    result.table.push_back(e);
    if (!e.ok) continue;
    const int idx = static_cast<int>(result.table.size()) - 1;
    if (best < 0) {
      best = idx;
      continue;
    }
    const CutoffEvaluation& b = result.table[static_cast<std::size_t>(best)];
    const bool lower = std::tie(c.position, c.torque) < std::tie(b.cutoffs.position, b.cutoffs.torque);
    if (e.residual < b.residual || (e.residual == b.residual && lower)) best = idx;
  }
  if (best < 0) throw SolverError("every cutoff grid point failed");
  result.best = result.table[static_cast<std::size_t>(best)].cutoffs;
  result.best_residual = result.table[static_cast<std::size_t>(best)].residual;
  return result;
}

void write_trial_csv(std::ostream& out, const RawTrial& trial) {
  const int n = trial.dof();
  out << 't';
  for (int j = 1; j <= n; ++j) out << ",q_" << j;
  for (int j = 1; j <= n; ++j) out << ",tau_" << j;
  out << '\n';
  for (int k = 0; k < trial.samples(); ++k) {
    out << format_double(trial.timestamps(k));
    for (int j = 0; j < n; ++j) out << ',' << format_double(trial.q(k, j));
    for (int j = 0; j < n; ++j) out << ',' << format_double(trial.tau(k, j));
    out << '\n';
  }
}

RawTrial read_trial_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trial CSV is empty", 1);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header.size() % 2 == 0 || header.front() != "t") {
    throw ParseError("trial CSV header must be t,q_1..q_N,tau_1..tau_N", 1);
  }
  const int n = static_cast<int>((header.size() - 1) / 2);
  for (int j = 0; j < n; ++j) {
    if (header[1 + j] != "q_" + std::to_string(j + 1) ||
        header[1 + n + j] != "tau_" + std::to_string(j + 1)) {
      throw ParseError("trial CSV header column mismatch", 1);
    }
  }
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        throw ParseError("trial CSV row " + std::to_string(line_no) + ": bad number '" + cell + "'",
                         line_no);
      }
      row.push_back(v);
    }
    if (row.size() != header.size()) {
      throw ParseError("trial CSV row " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields",
                       line_no);
    }
    rows.push_back(std::move(row));
  }
  RawTrial t;
  const auto s = static_cast<Eigen::Index>(rows.size());
  t.timestamps.resize(s);
  t.q.resize(s, n);
  t.tau.resize(s, n);
  for (Eigen::Index k = 0; k < s; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    t.timestamps(k) = r[0];
    for (int j = 0; j < n; ++j) {
      t.q(k, j) = r[1 + j];
      t.tau(k, j) = r[1 + n + j];
    }
  }
  return t;
}

void write_processed_csv(std::ostream& out, const ProcessedDataset& data) {
  const int n = data.states.empty() ? 0 : static_cast<int>(data.states.front().q.size());
  out << 't';
  for (const char* prefix : {"q_", "qd_", "qdd_", "tau_"}) {
    for (int j = 1; j <= n; ++j) out << ',' << prefix << j;
  }
  out << '\n';
  for (std::size_t k = 0; k < data.states.size(); ++k) {
    const JointState& s = data.states[k];
    out << format_double(data.timestamps(static_cast<Eigen::Index>(k)));
    for (const Eigen::VectorXd* v : {&s.q, &s.qd, &s.qdd, &data.torques[k]}) {
      for (int j = 0; j < n; ++j) out << ',' << format_double((*v)(j));
    }
    out << '\n';
  }
}

}  // namespace physid
