#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "model/geometry.hpp"

namespace pedplan::sim {

enum class ScenarioKind { kCpaf, kCpan25, kCpan75, kCpcn, kFpNear, kFpStopShort, kCpcnEmpty };

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);
const std::vector<ScenarioKind>& all_scenario_kinds();

enum class Side { kLeft, kRight };

/// Layout constants shared by every scenario of a suite.
struct ScenarioGeometry {
  double ego_start_distance = 50.0;  // front bumper to the conflict line
  double ped_start_distance = 5.0;   // pedestrian start to the impact point
  double lane_width = 3.5;
  double obstacle_length = 6.0;
  double obstacle_width = 2.0;
  double obstacle_lane_gap = 0.5;  // inner obstacle edge to the lane boundary
  double obstacle_end_gap = 2.0;   // obstacle end to the crossing line
  double fp_lateral_gap = 0.9;     // false-positive stop point to the ego corridor
  double fp_stop_lead = 2.0;       // FP pedestrian stops this long before the ego arrives
  double exit_distance = 20.0;     // exit line behind the conflict line
  double vehicle_length = 4.5;
  double vehicle_width = 1.8;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kCpan25;
  double ego_speed_kmh = 50.0;
  double ped_speed_kmh = 5.0;
  double impact_fraction = 0.0;  // [0, 0.5], from the near-side edge
  std::optional<OcclusionGeometry> occlusion;
  Side ped_side = Side::kRight;
  std::uint64_t seed = 1;

  /// Defaults for a kind: pedestrian speed and side, occlusion for CPCN variants.
  static ScenarioSpec make(ScenarioKind kind, double impact_fraction, const ScenarioGeometry& geometry,
                           double ego_speed_kmh = 50.0, std::uint64_t seed = 1);
  std::string name() const;
  void validate() const;
};

/// Constant-speed crossing along t, optionally stopping at `stop_t`.
struct ScriptedPedestrian {
  int id = 0;
  Vec2 start;
  double direction = 1.0;  // +1 walks to the left (+t), -1 to the right
  double speed = 0.0;      // m/s
  double start_time = 0.0;
  std::optional<double> stop_t;

  Vec2 position(double time) const;
  double speed_at(double time) const;
  double heading() const;  // radians from +s
};

struct ScenarioWorld {
  double ego_s = 0.0;  // ego centre
  double ego_t = 0.0;
  double ego_speed = 0.0;  // m/s
  double conflict_s = 0.0;
  double exit_s = 0.0;
  double ego_arrival_time = 0.0;
  Vec2 impact_point;
  std::vector<ScriptedPedestrian> pedestrians;
  OcclusionGeometry obstacles;  // world frame
};

ScenarioWorld build_scenario(const ScenarioSpec& spec, const ScenarioGeometry& geometry);

}  // namespace pedplan::sim
