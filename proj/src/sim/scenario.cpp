#include "sim/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "common/errors.hpp"

namespace pedplan::sim {

namespace {

constexpr double kKmh = 1.0 / 3.6;

struct KindInfo {
  ScenarioKind kind;
  std::string_view name;
};

constexpr std::array<KindInfo, 7> kKinds{{
    {ScenarioKind::kCpaf, "CPAF"},
    {ScenarioKind::kCpan25, "CPAN-25"},
    {ScenarioKind::kCpan75, "CPAN-75"},
    {ScenarioKind::kCpcn, "CPCN"},
    {ScenarioKind::kFpNear, "FP-near"},
    {ScenarioKind::kFpStopShort, "FP-stop-short"},
    {ScenarioKind::kCpcnEmpty, "CPCN-empty"},
}};

bool is_cpcn(ScenarioKind kind) { return kind == ScenarioKind::kCpcn || kind == ScenarioKind::kCpcnEmpty; }

OcclusionGeometry cpcn_obstacle(const ScenarioGeometry& g) {
  // Relative to the crossing line at s = 0 and the lane centre at t = 0; placed on the right.
  OcclusionGeometry occ;
  occ.sensor_origin = {0.5 * g.vehicle_length, 0.0};
  const double t_max = -0.5 * g.lane_width - g.obstacle_lane_gap;
  occ.obstacles.push_back({-g.obstacle_end_gap - g.obstacle_length, -g.obstacle_end_gap, t_max - g.obstacle_width, t_max});
  return occ;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  throw ConfigError("unknown scenario kind '" + std::string(name) + "'");
}

const std::vector<ScenarioKind>& all_scenario_kinds() {
  static const std::vector<ScenarioKind> kinds = [] {
    std::vector<ScenarioKind> out;
    for (const auto& k : kKinds) out.push_back(k.kind);
    return out;
  }();
  return kinds;
}

ScenarioSpec ScenarioSpec::make(ScenarioKind kind, double impact_fraction, const ScenarioGeometry& geometry,
                                double ego_speed_kmh, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.kind = kind;
  spec.ego_speed_kmh = ego_speed_kmh;
  spec.impact_fraction = impact_fraction;
  spec.seed = seed;
  spec.ped_speed_kmh = kind == ScenarioKind::kCpaf ? 8.0 : 5.0;
  spec.ped_side = kind == ScenarioKind::kCpaf ? Side::kLeft : Side::kRight;
  if (is_cpcn(kind)) spec.occlusion = cpcn_obstacle(geometry);
  return spec;
}

std::string ScenarioSpec::name() const {
  if (kind == ScenarioKind::kFpNear || kind == ScenarioKind::kFpStopShort || kind == ScenarioKind::kCpcnEmpty) {
    return std::string(to_string(kind));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03d", std::string(to_string(kind)).c_str(),
                static_cast<int>(std::lround(impact_fraction * 1000.0)));
  return buf;
}

void ScenarioSpec::validate() const {
  if (!(ego_speed_kmh > 0.0)) throw ConfigError("scenario ego speed must be positive");
  if (!(ped_speed_kmh > 0.0)) throw ConfigError("scenario pedestrian speed must be positive");
  if (impact_fraction < 0.0 || impact_fraction > 0.5) throw ConfigError("impact_fraction must lie in [0, 0.5]");
  if (is_cpcn(kind) && (!occlusion || occlusion->empty())) {
    throw ConfigError("CPCN scenarios need occlusion geometry");
  }
  if (!is_cpcn(kind) && occlusion && !occlusion->empty()) {
    throw ConfigError(std::string(to_string(kind)) + " scenarios carry no occlusion");
  }
}

Vec2 ScriptedPedestrian::position(double time) const {
  const double walked = speed * std::max(0.0, time - start_time);
  double t = start.t + direction * walked;
  if (stop_t) t = direction > 0.0 ? std::min(t, *stop_t) : std::max(t, *stop_t);
  return {start.s, t};
}

double ScriptedPedestrian::speed_at(double time) const {
  if (time < start_time) return 0.0;
  if (stop_t) {
    const double t = position(time).t;
    if ((direction > 0.0 && t >= *stop_t) || (direction < 0.0 && t <= *stop_t)) return 0.0;
  }
  return speed;
}

double ScriptedPedestrian::heading() const { return direction * 0.5 * std::numbers::pi; }

ScenarioWorld build_scenario(const ScenarioSpec& spec, const ScenarioGeometry& g) {
  spec.validate();
  ScenarioWorld world;
  world.ego_speed = spec.ego_speed_kmh * kKmh;
  world.conflict_s = world.ego_s + 0.5 * g.vehicle_length + g.ego_start_distance;
  world.exit_s = world.conflict_s + g.exit_distance;
  world.ego_arrival_time = g.ego_start_distance / world.ego_speed;
  if (spec.occlusion) world.obstacles = spec.occlusion->relative_to(-world.conflict_s, 0.0);

  if (spec.kind == ScenarioKind::kCpcnEmpty) return world;

  const double dir = spec.ped_side == Side::kRight ? 1.0 : -1.0;
  const double near_edge = -dir * 0.5 * g.vehicle_width;
  const double ped_speed = spec.ped_speed_kmh * kKmh;

  ScriptedPedestrian ped;
  ped.id = 0;
  ped.direction = dir;
  ped.speed = ped_speed;

  double target_t;
  double event_time;
  if (spec.kind == ScenarioKind::kFpNear || spec.kind == ScenarioKind::kFpStopShort) {
    const double far_edge = -near_edge;
    target_t = spec.kind == ScenarioKind::kFpNear ? far_edge + dir * g.fp_lateral_gap
                                                  : near_edge - dir * g.fp_lateral_gap;
    ped.stop_t = target_t;
    event_time = world.ego_arrival_time - g.fp_stop_lead;
  } else {
    const double fraction = spec.kind == ScenarioKind::kCpan75 ? 1.0 - spec.impact_fraction : spec.impact_fraction;
    target_t = near_edge + dir * fraction * g.vehicle_width;
    event_time = world.ego_arrival_time;
  }
  world.impact_point = {world.conflict_s, target_t};

  // Closed-form timing: reach the target point exactly at the event time.
  double distance = g.ped_start_distance;
  double start_time = event_time - distance / ped_speed;
  if (start_time < 0.0) {
    distance = std::max(0.0, event_time) * ped_speed;
    start_time = 0.0;
  }
  ped.start = {world.conflict_s, target_t - dir * distance};
  ped.start_time = start_time;

  for (const Rect& r : world.obstacles.obstacles) {
    if (r.contains(ped.start)) throw ConfigError("pedestrian start lies inside an obstacle");
  }
  world.pedestrians.push_back(ped);
  return world;
}

}  // namespace pedplan::sim
