#include "dfsc/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace dfsc {

using nlohmann::json;

const SensorSpec& Scenario::sensor(SensorId id) const {
  for (const auto& s : sensors) {
    if (s.id == id) return s;
  }
  throw std::out_of_range("unknown sensor " + std::to_string(id));
}

namespace {

// Thin cursor over a JSON object that remembers its pointer path and rejects
// keys nobody asked about.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(path_.empty() ? "/" : path_, what); }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ScenarioError(path_ + "/" + key, what);
  }

  bool has(const std::string& key) const {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) const {
    if (!has(key)) fail(key, "missing required field");
    return j_.at(key);
  }

  std::string child(const std::string& key) const { return path_ + "/" + key; }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double dflt) const { return has(key) ? number(key) : dflt; }

  int integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }
  int integer(const std::string& key, int dflt) const { return has(key) ? integer(key) : dflt; }

  std::string string(const std::string& key, const std::string& dflt) const {
    if (!has(key)) return dflt;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  const json& array(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array");
    return v;
  }

  void check_unknown() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) fail(k, "unknown field");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

void require(bool ok, const Node& n, const std::string& key, const std::string& what) {
  if (!ok) n.fail(key, what);
}

DetectionProfile parse_profile(const Node& n, DetectionProfile p) {
  p.pd_max = n.number("pd_max", p.pd_max);
  p.rho_min = n.number("rho_min", p.rho_min);
  p.rho_max = n.number("rho_max", p.rho_max);
  p.lambda_taper = n.number("lambda", p.lambda_taper);
  p.theta_max = n.has("theta_max_deg") ? deg2rad(n.number("theta_max_deg")) : p.theta_max;
  n.check_unknown();
  require(p.pd_max > 0.0 && p.pd_max <= 1.0, n, "pd_max", "must be in (0, 1]");
  require(p.rho_min >= 0.0, n, "rho_min", "must be >= 0");
  require(p.rho_max > p.rho_min, n, "rho_max", "must exceed rho_min");
  require(p.lambda_taper > 0.0, n, "lambda", "must be positive");
  require(p.theta_max > 0.0 && p.theta_max <= std::numbers::pi, n, "theta_max_deg",
          "must be in (0, 180]");
  return p;
}

ActionCatalogue parse_actions(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ScenarioError(path, "expected an array");
  if (arr.empty()) throw ScenarioError(path, "action catalogue is empty");
  ActionCatalogue out;
  std::set<int> ids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const Node a(arr[i], path + "/" + std::to_string(i));
    ControlCommand c;
    c.id = a.integer("id");
    c.dx = a.number("dx", 0.0);
    c.dy = a.number("dy", 0.0);
    c.dtheta = deg2rad(a.number("dtheta_deg", 0.0));
    a.check_unknown();
    if (!ids.insert(c.id).second) a.fail("id", "duplicate action id");
    out.push_back(c);
  }
  return out;
}

MotionModel parse_motion(const Node& n, MotionModel m) {
  const std::string kind = n.string("kind", m.kind == MotionKind::ConstantTurn ? "ct" : "cv");
  if (kind == "cv") {
    m.kind = MotionKind::ConstantVelocity;
  } else if (kind == "ct") {
    m.kind = MotionKind::ConstantTurn;
  } else {
    n.fail("kind", "expected \"cv\" or \"ct\"");
  }
  m.sigma_accel = n.number("sigma_accel", m.sigma_accel);
  m.sigma_omega = n.number("sigma_omega", m.sigma_omega);
  m.survival_prob = n.number("survival", m.survival_prob);
  n.check_unknown();
  require(m.sigma_accel >= 0.0, n, "sigma_accel", "must be >= 0");
  require(m.sigma_omega >= 0.0, n, "sigma_omega", "must be >= 0");
  require(m.survival_prob > 0.0 && m.survival_prob <= 1.0, n, "survival", "must be in (0, 1]");
  return m;
}

Scenario from_json(const json& root) {
  const Node top(root, "");
  Scenario sc;
  sc.name = top.string("name", "");
  sc.duration = top.integer("duration");
  require(sc.duration >= 1, top, "duration", "must be >= 1");
  sc.dt = top.number("dt", 1.0);
  require(sc.dt > 0.0, top, "dt", "must be positive");
  sc.comm_range = top.number("comm_range", sc.comm_range);
  require(sc.comm_range > 0.0, top, "comm_range", "must be positive");

  DetectionProfile default_profile;
  if (top.has("profile")) default_profile = parse_profile(Node(root.at("profile"), "/profile"), default_profile);
  ActionCatalogue default_actions;
  if (top.has("actions")) default_actions = parse_actions(root.at("actions"), "/actions");

  const json& sensors = top.array("sensors");
  if (sensors.empty()) top.fail("sensors", "at least one sensor is required");
  std::set<SensorId> sensor_ids;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const Node s(sensors[i], "/sensors/" + std::to_string(i));
    SensorSpec spec;
    spec.id = s.integer("id");
    if (!sensor_ids.insert(spec.id).second) s.fail("id", "duplicate sensor id");
    spec.pose.px = s.number("x");
    spec.pose.py = s.number("y");
    spec.pose.theta = wrap_angle(deg2rad(s.number("theta_deg", 0.0)));
    spec.profile = s.has("profile") ? parse_profile(Node(sensors[i].at("profile"), s.child("profile")),
                                                    default_profile)
                                    : default_profile;
    if (s.has("actions")) {
      spec.actions = parse_actions(sensors[i].at("actions"), s.child("actions"));
    } else if (!default_actions.empty()) {
      spec.actions = default_actions;
    } else {
      s.fail("actions", "no catalogue here and no top-level \"actions\"");
    }
    s.check_unknown();
    sc.sensors.push_back(std::move(spec));
  }
  std::sort(sc.sensors.begin(), sc.sensors.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  if (top.has("filter")) {
    const Node f(root.at("filter"), "/filter");
    auto& fc = sc.filter;
    fc.particles = f.integer("particles", fc.particles);
    fc.r_birth = f.number("r_birth", fc.r_birth);
    fc.r_min = f.number("r_min", fc.r_min);
    fc.r_estimate = f.number("r_estimate", fc.r_estimate);
    fc.merge_dist = f.number("merge_dist", fc.merge_dist);
    if (f.has("r_report")) fc.r_report = f.number("r_report");
    fc.birth_position_sigma = f.number("birth_position_sigma", fc.birth_position_sigma);
    fc.birth_velocity_sigma = f.number("birth_velocity_sigma", fc.birth_velocity_sigma);
    fc.birth_omega_sigma = f.number("birth_omega_sigma", fc.birth_omega_sigma);
    fc.max_births = f.integer("max_births", fc.max_births);
    fc.birth_assoc_threshold = f.number("birth_assoc_threshold", fc.birth_assoc_threshold);
    fc.gibbs_iterations = f.integer("gibbs_iterations", fc.gibbs_iterations);
    if (f.has("motion")) fc.motion = parse_motion(Node(root.at("filter").at("motion"), "/filter/motion"), fc.motion);
    f.check_unknown();
    require(fc.particles >= 1, f, "particles", "must be >= 1");
    require(fc.r_birth > 0.0 && fc.r_birth < 1.0, f, "r_birth", "must be in (0, 1)");
    require(fc.r_min >= 0.0 && fc.r_min < 1.0, f, "r_min", "must be in [0, 1)");
    require(fc.r_estimate > 0.0 && fc.r_estimate <= 1.0, f, "r_estimate", "must be in (0, 1]");
    require(!fc.r_report || (*fc.r_report > 0.0 && *fc.r_report <= 1.0), f, "r_report", "must be in (0, 1]");
    require(fc.merge_dist > 0.0, f, "merge_dist", "must be positive");
    require(fc.birth_position_sigma > 0.0, f, "birth_position_sigma", "must be positive");
    require(fc.birth_velocity_sigma > 0.0, f, "birth_velocity_sigma", "must be positive");
    require(fc.birth_omega_sigma >= 0.0, f, "birth_omega_sigma", "must be >= 0");
    require(fc.max_births >= 0, f, "max_births", "must be >= 0");
    require(fc.gibbs_iterations >= 1, f, "gibbs_iterations", "must be >= 1");
  }
  sc.filter.motion.dt = sc.dt;

  const json& targets = top.array("targets");
  std::set<int> target_ids;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Node t(targets[i], "/targets/" + std::to_string(i));
    TargetSpec spec;
    spec.id = t.integer("id");
    if (!target_ids.insert(spec.id).second) t.fail("id", "duplicate target id");
    spec.birth = t.integer("birth", 0);
    spec.death = t.integer("death", sc.duration);
    require(spec.birth >= 0, t, "birth", "must be >= 0");
    require(spec.birth < spec.death, t, "death", "must exceed birth");
    require(spec.death <= sc.duration, t, "death", "must not exceed duration");
    const json& st = t.array("state");
    if (st.size() != 4 && st.size() != 5) t.fail("state", "expected [x, y, vx, vy] or [x, y, vx, vy, omega]");
    for (std::size_t k = 0; k < st.size(); ++k) {
      if (!st[k].is_number()) t.fail("state", "expected numbers");
      spec.initial[static_cast<Eigen::Index>(k)] = st[k].get<double>();
    }
    MotionModel m;
    m.dt = sc.dt;
    if (t.has("motion")) m = parse_motion(Node(targets[i].at("motion"), t.child("motion")), m);
    if (m.kind == MotionKind::ConstantVelocity && spec.initial[4] != 0.0) {
      t.fail("state", "non-zero turn rate on a constant-velocity target");
    }
    m.dt = sc.dt;
    spec.motion = m;
    t.check_unknown();
    sc.targets.push_back(spec);
  }

  if (top.has("noise")) {
    const Node n(root.at("noise"), "/noise");
    sc.noise_sigma = n.number("sigma", sc.noise_sigma);
    n.check_unknown();
    require(sc.noise_sigma > 0.0, n, "sigma", "must be positive");
  }
  if (top.has("clutter")) {
    const Node n(root.at("clutter"), "/clutter");
    sc.clutter_rate = n.number("rate", sc.clutter_rate);
    n.check_unknown();
    require(sc.clutter_rate >= 0.0, n, "rate", "must be >= 0");
  }
  if (top.has("constraints")) {
    const Node n(root.at("constraints"), "/constraints");
    auto& c = sc.constraints;
    c.psi_th = n.number("psi_th", c.psi_th);
    c.eta_th = n.number("eta_th", c.eta_th);
    c.d_th = n.number("d_th", c.d_th);
    c.rho_eps = n.number("rho_eps", c.rho_eps);
    const std::string dir = n.string("void_direction", "at_least");
    if (dir == "at_least") {
      c.void_direction = VoidDirection::AtLeast;
    } else if (dir == "below") {
      c.void_direction = VoidDirection::Below;
    } else {
      n.fail("void_direction", "expected \"at_least\" or \"below\"");
    }
    n.check_unknown();
    require(c.psi_th > 0.0 && c.psi_th < 1.0, n, "psi_th", "must be in (0, 1)");
    require(c.eta_th > 0.0, n, "eta_th", "must be positive");
    require(c.rho_eps > 0.0, n, "rho_eps", "must be positive");
    require(c.d_th > 0.0, n, "d_th", "must be positive");
  }
  if (!(sc.constraints.d_th < sc.comm_range)) {
    throw ScenarioError("/constraints/d_th", "must be below comm_range");
  }
  if (top.has("optimizer")) {
    const Node n(root.at("optimizer"), "/optimizer");
    auto& o = sc.optimizer;
    o.iteration_cap = n.integer("iteration_cap", o.iteration_cap);
    if (n.has("dcd_runs")) {
      const json& v = root.at("optimizer").at("dcd_runs");
      if (v.is_string() && v.get<std::string>() == "auto") {
        o.dcd.runs.reset();
      } else if (v.is_number_integer() && v.get<int>() >= 1) {
        o.dcd.runs = v.get<int>();
      } else {
        n.fail("dcd_runs", "expected a positive integer or \"auto\"");
      }
    }
    o.dcd.inner_cap = n.integer("dcd_inner_cap", o.dcd.inner_cap);
    o.dcd.p_success = n.number("p_success", o.dcd.p_success);
    n.check_unknown();
    require(o.iteration_cap >= 1, n, "iteration_cap", "must be >= 1");
    require(o.dcd.inner_cap >= 1, n, "dcd_inner_cap", "must be >= 1");
    require(o.dcd.p_success > 0.0 && o.dcd.p_success < 1.0, n, "p_success", "must be in (0, 1)");
  }
  if (top.has("metrics")) {
    const Node n(root.at("metrics"), "/metrics");
    auto& m = sc.metrics;
    m.c = n.number("c", m.c);
    m.p = n.number("p", m.p);
    m.window = n.integer("window", m.window);
    n.check_unknown();
    require(m.c > 0.0, n, "c", "must be positive");
    require(m.p >= 1.0, n, "p", "must be >= 1");
    require(m.window >= 1, n, "window", "must be >= 1");
  }
  top.check_unknown();
  return sc;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ScenarioError("line " + std::to_string(line), "malformed JSON");
  }
  return from_json(root);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace dfsc
