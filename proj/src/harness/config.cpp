#include "harness/config.hpp"

#include <fstream>
#include <set>

#include "common/errors.hpp"

namespace pedplan::harness {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  Section sub(const char* key) {
    seen_.insert(key);
    return Section(j_.at(key), path_ + "." + key);
  }
  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (seen_.count(key) == 0) throw ConfigError("unknown key " + path_ + "." + key);
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_axis(Section& parent, const char* key, ped::Axis& axis, double scale) {
  if (!parent.has(key)) return;
  Section s = parent.sub(key);
  double lo = axis.lo / scale;
  double hi = axis.hi / scale;
  s.get("min", lo);
  s.get("max", hi);
  s.get("levels", axis.levels);
  s.finish();
  axis.lo = lo * scale;
  axis.hi = hi * scale;
}

json axis_json(const ped::Axis& axis, double scale) {
  return {{"min", axis.lo / scale}, {"max", axis.hi / scale}, {"levels", axis.levels}};
}

json rect_json(const Rect& r) {
  return {{"s_min", r.s_min}, {"s_max", r.s_max}, {"t_min", r.t_min}, {"t_max", r.t_max}};
}

Rect read_rect(const json& j, const std::string& path) {
  Section s(j, path);
  Rect r;
  s.get("s_min", r.s_min);
  s.get("s_max", r.s_max);
  s.get("t_min", r.t_min);
  s.get("t_max", r.t_max);
  s.finish();
  if (!(r.s_min <= r.s_max && r.t_min <= r.t_max)) throw ConfigError(path + ": empty rectangle");
  return r;
}

json reward_json(const ped::RewardParams& r) {
  return {{"collision_penalty", r.collision_penalty},
          {"velocity_weight", r.velocity_weight},
          {"lane_center_weight", r.lane_center_weight},
          {"longitudinal_action_penalty", r.longitudinal_action_penalty},
          {"lateral_action_penalty", r.lateral_action_penalty},
          {"desired_speed_kmh", r.desired_speed_kmh}};
}

void read_reward(Section& parent, const char* key, ped::RewardParams& r) {
  if (!parent.has(key)) return;
  Section s = parent.sub(key);
  s.get("collision_penalty", r.collision_penalty);
  s.get("velocity_weight", r.velocity_weight);
  s.get("lane_center_weight", r.lane_center_weight);
  s.get("longitudinal_action_penalty", r.longitudinal_action_penalty);
  s.get("lateral_action_penalty", r.lateral_action_penalty);
  s.get("desired_speed_kmh", r.desired_speed_kmh);
  s.finish();
}

std::vector<std::string> kind_names(const std::vector<sim::ScenarioKind>& kinds) {
  std::vector<std::string> out;
  for (auto k : kinds) out.emplace_back(sim::to_string(k));
  return out;
}

std::vector<sim::ScenarioKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<sim::ScenarioKind> out;
  for (const auto& n : names) out.push_back(sim::parse_scenario_kind(n));
  return out;
}

}  // namespace

std::vector<sim::ScenarioSpec> SuiteSpec::scenarios(const sim::ScenarioGeometry& geometry) const {
  std::vector<sim::ScenarioSpec> out;
  for (auto kind : kinds) {
    for (double f : impact_fractions) out.push_back(sim::ScenarioSpec::make(kind, f, geometry, ego_speed_kmh, seed));
  }
  for (auto kind : extra) out.push_back(sim::ScenarioSpec::make(kind, 0.0, geometry, ego_speed_kmh, seed));
  return out;
}

ped::ModelConfig HarnessConfig::model_for(sim::Variant variant) const {
  if (!sim::uses_planner(variant)) throw UsageError("the AEB-only variant has no planner model");
  const auto it = profiles.find(std::string(sim::to_string(variant)));
  if (it == profiles.end()) throw ConfigError("missing planner profile '" + std::string(sim::to_string(variant)) + "'");
  ped::ModelConfig m = model;
  m.reward = it->second.reward;
  m.appearance.p_appear = it->second.p_appear;
  return m;
}

void HarnessConfig::validate() const {
  model.discretization.validate();
  if (model.actions.longitudinal.empty() || model.actions.lateral.empty()) throw ConfigError("action sets must be non-empty");
  if (!(model.footprint.length > 0.0 && model.footprint.width > 0.0)) {
    throw ConfigError("pedestrian_model.collision_footprint must be positive");
  }
  if (!(model.planner_dt > 0.0)) throw ConfigError("planner_dt must be positive");
  if (!(model.discount > 0.0 && model.discount < 1.0)) throw ConfigError("solver.discount must lie in (0, 1)");
  if (!(solver.tolerance > 0.0)) throw ConfigError("solver.tolerance must be positive");
  if (solver.max_iterations < 1) throw ConfigError("solver.max_iterations must be >= 1");
  for (const auto& [name, p] : profiles) {
    const auto v = sim::parse_variant(name);
    if (!sim::uses_planner(v)) throw ConfigError("profile '" + name + "' is not a planner variant");
    p.reward.validate();
    if (p.p_appear < 0.0 || p.p_appear > 1.0) throw ConfigError("profile '" + name + "': p_appear must lie in [0, 1]");
  }
  episode.validate();
  if (!(suite.ego_speed_kmh > 0.0)) throw ConfigError("suite.ego_speed_kmh must be positive");
  for (double f : suite.impact_fractions) {
    if (f < 0.0 || f > 0.5) throw ConfigError("suite.impact_fractions must lie in [0, 0.5]");
  }
}

HarnessConfig default_config() {
  HarnessConfig c;
  // Vehicle grown by the pedestrian radius on every side.
  const double r = c.episode.simulation.ped_radius;
  c.model.footprint = {c.episode.vehicle.length + 2.0 * r, c.episode.vehicle.width + 2.0 * r};
  // Pedestrians that start walking from the curb reach crossing speed within a second.
  c.model.motion.accelerations = {0.0, 1.0, -1.0, 2.0, -2.0};

  // Tuned per variant: no collisions over the default suite, highest mean speed.
  PlannerProfile pomdp;
  pomdp.reward.velocity_weight = 0.1;
  pomdp.reward.longitudinal_action_penalty = -1.0;
  pomdp.p_appear = 0.1;
  PlannerProfile pomdp_aeb = pomdp;
  pomdp_aeb.reward.velocity_weight = 0.2;
  pomdp_aeb.p_appear = 0.2;
  c.profiles["pomdp"] = pomdp;
  c.profiles["pomdp_aeb"] = pomdp_aeb;
  return c;
}

HarnessConfig parse_config(const json& j) {
  HarnessConfig c = default_config();
  Section root(j, "config");
  auto& m = c.model;

  if (root.has("discretization")) {
    Section d = root.sub("discretization");
    read_axis(d, "ego_speed_kmh", m.discretization.ego_speed, ped::kKmh);
    read_axis(d, "ego_lateral_m", m.discretization.ego_lateral, 1.0);
    read_axis(d, "ped_s_m", m.discretization.ped_s, 1.0);
    read_axis(d, "ped_t_m", m.discretization.ped_t, 1.0);
    read_axis(d, "ped_speed_mps", m.discretization.ped_speed, 1.0);
    read_axis(d, "ped_heading_deg", m.discretization.ped_heading, ped::kDeg);
    d.finish();
  }
  if (root.has("actions")) {
    Section a = root.sub("actions");
    a.get("longitudinal", m.actions.longitudinal);
    a.get("lateral", m.actions.lateral);
    a.finish();
  }
  root.get("planner_dt", m.planner_dt);
  if (root.has("solver")) {
    Section s = root.sub("solver");
    s.get("discount", m.discount);
    s.get("tolerance", c.solver.tolerance);
    s.get("max_iterations", c.solver.max_iterations);
    s.finish();
  }
  if (root.has("pedestrian_model")) {
    Section p = root.sub("pedestrian_model");
    p.get("accelerations", m.motion.accelerations);
    p.get("max_speed", m.motion.max_speed);
    if (p.has("collision_footprint")) {
      Section f = p.sub("collision_footprint");
      f.get("length", m.footprint.length);
      f.get("width", m.footprint.width);
      f.finish();
    }
    if (p.has("noise")) {
      Section n = p.sub("noise");
      double heading_deg = m.noise.heading_std / ped::kDeg;
      n.get("position_std", m.noise.position_std);
      n.get("speed_std", m.noise.speed_std);
      n.get("heading_std_deg", heading_deg);
      n.finish();
      m.noise.heading_std = heading_deg * ped::kDeg;
    }
    if (p.has("offline_occlusion")) {
      m.occlusion.obstacles.clear();
      const json& arr = p.raw("offline_occlusion");
      if (!arr.is_array()) throw ConfigError("pedestrian_model.offline_occlusion must be an array");
      for (const auto& r : arr) m.occlusion.obstacles.push_back(read_rect(r, "pedestrian_model.offline_occlusion[]"));
    }
    p.finish();
  }
  if (root.has("profiles")) {
    const json& profiles = root.raw("profiles");
    if (!profiles.is_object()) throw ConfigError("profiles must be an object");
    for (const auto& [name, value] : profiles.items()) {
      // Partial profiles patch the built-in one of the same name.
      PlannerProfile prof = c.profiles.count(name) ? c.profiles.at(name) : PlannerProfile{};
      Section s(value, "profiles." + name);
      read_reward(s, "reward", prof.reward);
      s.get("p_appear", prof.p_appear);
      s.finish();
      c.profiles[name] = prof;
    }
  }
  auto& e = c.episode;
  if (root.has("aeb")) {
    Section a = root.sub("aeb");
    a.get("a_max", e.aeb.a_max);
    a.get("p_c_threshold", e.aeb.p_c_threshold);
    a.get("risk_threshold", e.aeb.risk_threshold);
    a.get("prediction_horizon", e.aeb.prediction_horizon);
    a.get("prediction_dt", e.aeb.prediction_dt);
    a.get("prediction_sample_count", e.aeb.prediction_sample_count);
    a.get("sigma_growth", e.aeb.sigma_growth);
    a.get("seed", e.aeb.seed);
    a.get("ped_radius", e.aeb.ped_radius);
    a.get("stop_margin", e.aeb.stop_margin);
    a.finish();
  }
  if (root.has("sensor")) {
    Section s = root.sub("sensor");
    double heading_deg = e.sensor.heading_std / ped::kDeg;
    s.get("position_std", e.sensor.position_std);
    s.get("speed_std", e.sensor.speed_std);
    s.get("heading_std_deg", heading_deg);
    s.get("tracking_delay", e.sensor.tracking_delay);
    s.get("rng_seed", e.sensor.rng_seed);
    s.finish();
    e.sensor.heading_std = heading_deg * ped::kDeg;
  }
  if (root.has("vehicle")) {
    Section v = root.sub("vehicle");
    v.get("length", e.vehicle.length);
    v.get("width", e.vehicle.width);
    v.get("brake_delay", e.vehicle.brake_delay);
    v.get("max_speed_kmh", e.vehicle.max_speed_kmh);
    v.get("cruise_accel", e.vehicle.cruise_accel);
    v.get("lateral_limit", e.vehicle.lateral_limit);
    v.finish();
  }
  if (root.has("simulation")) {
    Section s = root.sub("simulation");
    s.get("dt", e.simulation.dt);
    s.get("planner_period", e.simulation.planner_period);
    s.get("ped_radius", e.simulation.ped_radius);
    s.get("max_duration", e.simulation.max_duration);
    s.get("clear_margin", e.simulation.clear_margin);
    s.finish();
  }
  if (root.has("scenario_geometry")) {
    Section g = root.sub("scenario_geometry");
    g.get("ego_start_distance", e.geometry.ego_start_distance);
    g.get("ped_start_distance", e.geometry.ped_start_distance);
    g.get("lane_width", e.geometry.lane_width);
    g.get("obstacle_length", e.geometry.obstacle_length);
    g.get("obstacle_width", e.geometry.obstacle_width);
    g.get("obstacle_lane_gap", e.geometry.obstacle_lane_gap);
    g.get("obstacle_end_gap", e.geometry.obstacle_end_gap);
    g.get("fp_lateral_gap", e.geometry.fp_lateral_gap);
    g.get("fp_stop_lead_s", e.geometry.fp_stop_lead);
    g.get("exit_distance", e.geometry.exit_distance);
    g.finish();
  }
  if (root.has("suite")) {
    Section s = root.sub("suite");
    s.get("ego_speed_kmh", c.suite.ego_speed_kmh);
    std::vector<std::string> kinds = kind_names(c.suite.kinds);
    std::vector<std::string> extra = kind_names(c.suite.extra);
    s.get("kinds", kinds);
    s.get("impact_fractions", c.suite.impact_fractions);
    s.get("extra", extra);
    s.get("seed", c.suite.seed);
    s.finish();
    c.suite.kinds = parse_kinds(kinds);
    c.suite.extra = parse_kinds(extra);
  }
  root.get("cache_dir", c.cache_dir);
  root.get("solve_if_missing", c.solve_if_missing);
  root.finish();

  m.occlusion.sensor_origin = {0.5 * e.vehicle.length, 0.0};
  e.geometry.vehicle_length = e.vehicle.length;
  e.geometry.vehicle_width = e.vehicle.width;
  c.validate();
  return c;
}

HarnessConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

json model_json(const ped::ModelConfig& m, const SolverSettings& solver) {
  const auto& d = m.discretization;
  json occlusion = json::array();
  for (const Rect& r : m.occlusion.obstacles) occlusion.push_back(rect_json(r));
  json j{
      {"discretization",
       {{"ego_speed_kmh", axis_json(d.ego_speed, ped::kKmh)},
        {"ego_lateral_m", axis_json(d.ego_lateral, 1.0)},
        {"ped_s_m", axis_json(d.ped_s, 1.0)},
        {"ped_t_m", axis_json(d.ped_t, 1.0)},
        {"ped_speed_mps", axis_json(d.ped_speed, 1.0)},
        {"ped_heading_deg", axis_json(d.ped_heading, ped::kDeg)}}},
      {"actions", {{"longitudinal", m.actions.longitudinal}, {"lateral", m.actions.lateral}}},
      {"reward", reward_json(m.reward)},
      {"motion", {{"accelerations", m.motion.accelerations}, {"max_speed", m.motion.max_speed}}},
      {"collision_footprint", {{"length", m.footprint.length}, {"width", m.footprint.width}}},
      {"offline_occlusion", occlusion},
      {"sensor_origin", {m.occlusion.sensor_origin.s, m.occlusion.sensor_origin.t}},
      {"planner_dt", m.planner_dt},
      {"discount", m.discount},
      {"tolerance", solver.tolerance},
      {"max_iterations", solver.max_iterations},
  };
  // Appearance only enters the offline model through occluded cells.
  if (!m.occlusion.empty()) j["p_appear"] = m.appearance.p_appear;
  return j;
}

json to_json(const HarnessConfig& c) {
  const auto& m = c.model;
  const auto& d = m.discretization;
  const auto& e = c.episode;
  json occlusion = json::array();
  for (const Rect& r : m.occlusion.obstacles) occlusion.push_back(rect_json(r));
  json profiles = json::object();
  for (const auto& [name, p] : c.profiles) profiles[name] = {{"reward", reward_json(p.reward)}, {"p_appear", p.p_appear}};
  return {
      {"discretization",
       {{"ego_speed_kmh", axis_json(d.ego_speed, ped::kKmh)},
        {"ego_lateral_m", axis_json(d.ego_lateral, 1.0)},
        {"ped_s_m", axis_json(d.ped_s, 1.0)},
        {"ped_t_m", axis_json(d.ped_t, 1.0)},
        {"ped_speed_mps", axis_json(d.ped_speed, 1.0)},
        {"ped_heading_deg", axis_json(d.ped_heading, ped::kDeg)}}},
      {"actions", {{"longitudinal", m.actions.longitudinal}, {"lateral", m.actions.lateral}}},
      {"planner_dt", m.planner_dt},
      {"solver", {{"discount", m.discount}, {"tolerance", c.solver.tolerance}, {"max_iterations", c.solver.max_iterations}}},
      {"pedestrian_model",
       {{"accelerations", m.motion.accelerations},
        {"max_speed", m.motion.max_speed},
        {"collision_footprint", {{"length", m.footprint.length}, {"width", m.footprint.width}}},
        {"noise",
         {{"position_std", m.noise.position_std},
          {"speed_std", m.noise.speed_std},
          {"heading_std_deg", m.noise.heading_std / ped::kDeg}}},
        {"offline_occlusion", occlusion}}},
      {"profiles", profiles},
      {"aeb",
       {{"a_max", e.aeb.a_max},
        {"p_c_threshold", e.aeb.p_c_threshold},
        {"risk_threshold", e.aeb.risk_threshold},
        {"prediction_horizon", e.aeb.prediction_horizon},
        {"prediction_dt", e.aeb.prediction_dt},
        {"prediction_sample_count", e.aeb.prediction_sample_count},
        {"sigma_growth", e.aeb.sigma_growth},
        {"seed", e.aeb.seed},
        {"ped_radius", e.aeb.ped_radius},
        {"stop_margin", e.aeb.stop_margin}}},
      {"sensor",
       {{"position_std", e.sensor.position_std},
        {"speed_std", e.sensor.speed_std},
        {"heading_std_deg", e.sensor.heading_std / ped::kDeg},
        {"tracking_delay", e.sensor.tracking_delay},
        {"rng_seed", e.sensor.rng_seed}}},
      {"vehicle",
       {{"length", e.vehicle.length},
        {"width", e.vehicle.width},
        {"brake_delay", e.vehicle.brake_delay},
        {"max_speed_kmh", e.vehicle.max_speed_kmh},
        {"cruise_accel", e.vehicle.cruise_accel},
        {"lateral_limit", e.vehicle.lateral_limit}}},
      {"simulation",
       {{"dt", e.simulation.dt},
        {"planner_period", e.simulation.planner_period},
        {"ped_radius", e.simulation.ped_radius},
        {"max_duration", e.simulation.max_duration},
        {"clear_margin", e.simulation.clear_margin}}},
      {"scenario_geometry",
       {{"ego_start_distance", e.geometry.ego_start_distance},
        {"ped_start_distance", e.geometry.ped_start_distance},
        {"lane_width", e.geometry.lane_width},
        {"obstacle_length", e.geometry.obstacle_length},
        {"obstacle_width", e.geometry.obstacle_width},
        {"obstacle_lane_gap", e.geometry.obstacle_lane_gap},
        {"obstacle_end_gap", e.geometry.obstacle_end_gap},
        {"fp_lateral_gap", e.geometry.fp_lateral_gap},
        {"fp_stop_lead_s", e.geometry.fp_stop_lead},
        {"exit_distance", e.geometry.exit_distance}}},
      {"suite",
       {{"ego_speed_kmh", c.suite.ego_speed_kmh},
        {"kinds", kind_names(c.suite.kinds)},
        {"impact_fractions", c.suite.impact_fractions},
        {"extra", kind_names(c.suite.extra)},
        {"seed", c.suite.seed}}},
      {"cache_dir", c.cache_dir},
      {"solve_if_missing", c.solve_if_missing},
  };
}

}  // namespace pedplan::harness
