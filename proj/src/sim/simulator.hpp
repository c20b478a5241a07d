#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "aeb/aeb.hpp"
#include "model/pedestrian_pomdp.hpp"
#include "sim/episode_log.hpp"
#include "sim/pomdp_planner.hpp"
#include "sim/scenario.hpp"

namespace pedplan::sim {

enum class Variant { kAebOnly, kPomdp, kPomdpAeb };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view name);
inline bool uses_planner(Variant v) { return v != Variant::kAebOnly; }
inline bool uses_aeb(Variant v) { return v != Variant::kPomdp; }

struct VehicleModel {
  double length = 4.5;
  double width = 1.8;
  double brake_delay = 0.2;  // every command takes effect this long after issue
  double max_speed_kmh = 50.0;
  double cruise_accel = 1.0;  // AEB-only speed keeping
  double lateral_limit = 1.0;

  void validate() const;
};

struct SensorModel {
  double position_std = 0.1;
  double speed_std = 0.2;
  double heading_std = 10.0 * ped::kDeg;
  double tracking_delay = 0.2;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SimulationConfig {
  double dt = 0.05;
  double planner_period = 0.2;
  double ped_radius = 0.3;
  double max_duration = 40.0;
  double clear_margin = 0.5;  // lateral clearance beyond the corridor for "pedestrian clear"

  void validate() const;
};

struct EpisodeConfig {
  SimulationConfig simulation;
  VehicleModel vehicle;
  SensorModel sensor;
  aeb::AebConfig aeb;
  ScenarioGeometry geometry;

  void validate() const;
};

struct CollisionRecord {
  std::size_t pedestrian = 0;
  double speed_kmh = 0.0;
};

/// Closed test: pedestrian disc touching the ego rectangle counts.
std::optional<CollisionRecord> detect_collision(Vec2 ego_center, double ego_speed, double length, double width,
                                                std::span<const Vec2> pedestrians, double ped_radius);

/// Closed-loop episode. `policy` is required for the POMDP variants.
EpisodeLog run_episode(const ScenarioSpec& scenario, Variant variant, const EpisodeConfig& config,
                       const Policy* policy = nullptr);

}  // namespace pedplan::sim
