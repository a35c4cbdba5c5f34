#include <algorithm>
#include <cmath>
#include <limits>

#include "physid/errors.hpp"
#include "physid/excite.hpp"

namespace physid {

namespace {

// Log-sum-exp smooth maximum; never below the true maximum.
double smooth_max(const std::vector<double>& v, double beta) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double x : v) sum += std::exp(beta * (x - m));
  return m + std::log(sum) / beta;
}

std::string indexed(const char* name, int i) { return std::string(name) + "[" + std::to_string(i) + "]"; }

}  // namespace

ConstraintValues ConstraintRecord::values() const {
  ConstraintValues v;
  v.equalities.reserve(equalities.size());
  v.inequalities.reserve(inequalities.size());
  for (const NamedValue& e : equalities) v.equalities.push_back(e.value);
  for (const NamedValue& h : inequalities) v.inequalities.push_back(h.value);
  return v;
}

double ConstraintRecord::max_violation() const { return values().infeasibility(); }

const NamedValue* ConstraintRecord::find(const std::string& name) const {
  for (const auto* list : {&equalities, &inequalities}) {
    for (const NamedValue& v : *list) {
      if (v.name == name) return &v;
    }
  }
  return nullptr;
}

ConstraintRecord evaluate_constraints(const FourierTrajectory& traj, const DesignProblem& problem) {
  const RobotModel& model = problem.model;
  const int n = model.dof();
  if (traj.dof() != n) throw DimensionError("trajectory and model dof differ");
  const std::vector<double> times = sample_times(traj.duration, problem.sample_rate);
  const std::size_t S = times.size();

  std::vector<std::vector<double>> upper(n), lower(n), vel(n), acc(n);
  for (int i = 0; i < n; ++i) {
    upper[i].reserve(S);
    lower[i].reserve(S);
    vel[i].reserve(2 * S);
    acc[i].reserve(2 * S);
  }

  struct Pair {
    int link;
    int sphere;
    int obstacle;
    std::vector<double> values;
  };
  std::vector<Pair> pairs;
  for (int l = 0; l < n && l < static_cast<int>(problem.link_spheres.size()); ++l) {
    for (int s = 0; s < static_cast<int>(problem.link_spheres[l].size()); ++s) {
      for (int o = 0; o < static_cast<int>(problem.obstacles.size()); ++o) {
        pairs.push_back({l, s, o, {}});
      }
    }
  }

  for (double t : times) {
    const JointState st = fourier_eval(traj, t);
    for (int i = 0; i < n; ++i) {
      const JointSpec& j = model.links[i].joint;
      upper[i].push_back(st.q(i) - j.position_upper);
      lower[i].push_back(j.position_lower - st.q(i));
      vel[i].push_back(st.qd(i) - j.velocity_limit);
      vel[i].push_back(-st.qd(i) - j.velocity_limit);
      acc[i].push_back(st.qdd(i) - j.acceleration_limit);
      acc[i].push_back(-st.qdd(i) - j.acceleration_limit);
    }
    if (!pairs.empty()) {
      const auto poses = forward_kinematics(model, st.q);
      for (Pair& p : pairs) {
        const Sphere& ls = problem.link_spheres[p.link][p.sphere];
        const Sphere& ob = problem.obstacles[p.obstacle];
        const double clearance = (poses[p.link] * ls.center - ob.center).norm() - ls.radius -
                                 ob.radius - problem.collision_margin;
        p.values.push_back(-clearance);
      }
    }
  }

  ConstraintRecord r;
  const double beta = kSmoothMaxSharpness;
  for (int i = 0; i < n; ++i) {
    r.inequalities.push_back({indexed("q_upper", i), smooth_max(upper[i], beta)});
    r.inequalities.push_back({indexed("q_lower", i), smooth_max(lower[i], beta)});
    r.inequalities.push_back({indexed("qd_limit", i), smooth_max(vel[i], beta)});
    r.inequalities.push_back({indexed("qdd_limit", i), smooth_max(acc[i], beta)});
  }
  for (const Pair& p : pairs) {
    r.inequalities.push_back({"collision[link " + std::to_string(p.link) + " sphere " +
                                  std::to_string(p.sphere) + " obstacle " +
                                  std::to_string(p.obstacle) + "]",
                              smooth_max(p.values, beta)});
  }

  const JointState start = fourier_eval(traj, 0.0);
  const JointState end = fourier_eval(traj, traj.duration);
  for (int i = 0; i < n; ++i) {
    r.equalities.push_back({indexed("qd_start", i), start.qd(i)});
    r.equalities.push_back({indexed("qd_end", i), end.qd(i)});
    r.equalities.push_back({indexed("qdd_start", i), start.qdd(i)});
    r.equalities.push_back({indexed("qdd_end", i), end.qdd(i)});
  }
  return r;
}

}  // namespace physid
