#include "sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "common/errors.hpp"

namespace pedplan::sim {

namespace {

constexpr double kKmh = 1.0 / 3.6;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

int ticks_of(double duration, double dt) { return static_cast<int>(std::lround(duration / dt)); }

struct Snapshot {
  double time;
  Vec2 ego;
  std::vector<Vec2> peds;
  std::vector<double> speeds;
};

struct Command {
  double longitudinal = 0.0;
  double lateral = 0.0;
};

struct Ego {
  double s = 0.0;
  double t = 0.0;
  double v = 0.0;
};

// Effective acceleration once the standstill and top-speed clamps are applied.
double effective_accel(double v, double a, double vmax) {
  if (a < 0.0 && v <= 0.0) return 0.0;
  if (a > 0.0 && v >= vmax) return 0.0;
  return a;
}

void integrate(Ego& ego, double a, double dt, double vmax) {
  if (a < 0.0 && ego.v + a * dt <= 0.0) {
    ego.s += ego.v * ego.v / (-2.0 * a);
    ego.v = 0.0;
  } else if (a > 0.0 && ego.v + a * dt >= vmax) {
    const double t_cap = std::max(0.0, (vmax - ego.v) / a);
    ego.s += ego.v * t_cap + 0.5 * a * t_cap * t_cap + vmax * (dt - t_cap);
    ego.v = vmax;
  } else {
    ego.s += ego.v * dt + 0.5 * a * dt * dt;
    ego.v += a * dt;
  }
}

// Whether the remaining scripted path keeps the pedestrian out of the ego corridor band.
bool pedestrian_clear(const ScriptedPedestrian& p, double time, const Ego& ego, const EpisodeConfig& cfg) {
  const double r = cfg.simulation.ped_radius;
  const Vec2 pos = p.position(time);
  if (pos.s + r < ego.s - 0.5 * cfg.vehicle.length) return true;
  const double half = 0.5 * cfg.vehicle.width + r + cfg.simulation.clear_margin;
  const double lo = ego.t - half;
  const double hi = ego.t + half;
  const double end = p.stop_t ? *p.stop_t : p.direction * std::numeric_limits<double>::infinity();
  const double a = std::min(pos.t, end);
  const double b = std::max(pos.t, end);
  return b < lo || a > hi;
}

}  // namespace

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kAebOnly:
      return "aeb";
    case Variant::kPomdp:
      return "pomdp";
    case Variant::kPomdpAeb:
      return "pomdp_aeb";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "aeb") return Variant::kAebOnly;
  if (name == "pomdp") return Variant::kPomdp;
  if (name == "pomdp_aeb") return Variant::kPomdpAeb;
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected aeb, pomdp or pomdp_aeb)");
}

void VehicleModel::validate() const {
  if (!(length > 0.0 && width > 0.0)) throw ConfigError("vehicle dimensions must be positive");
  if (brake_delay < 0.0) throw ConfigError("vehicle.brake_delay must be non-negative");
  if (!(max_speed_kmh > 0.0)) throw ConfigError("vehicle.max_speed_kmh must be positive");
  if (cruise_accel < 0.0 || lateral_limit < 0.0) throw ConfigError("vehicle limits must be non-negative");
}

void SensorModel::validate() const {
  if (position_std < 0.0 || speed_std < 0.0 || heading_std < 0.0) throw ConfigError("sensor noise must be >= 0");
  if (tracking_delay < 0.0) throw ConfigError("sensor.tracking_delay must be non-negative");
}

void SimulationConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("simulation.dt must be positive");
  if (!(planner_period >= dt)) throw ConfigError("simulation.planner_period must be >= dt");
  if (ped_radius < 0.0 || clear_margin < 0.0) throw ConfigError("simulation radii must be non-negative");
  if (!(max_duration > 0.0)) throw ConfigError("simulation.max_duration must be positive");
}

void EpisodeConfig::validate() const {
  simulation.validate();
  vehicle.validate();
  sensor.validate();
  aeb.validate();
}

std::optional<CollisionRecord> detect_collision(Vec2 ego_center, double ego_speed, double length, double width,
                                                std::span<const Vec2> pedestrians, double ped_radius) {
  const Rect footprint = Rect::centered(ego_center, length, width);
  for (std::size_t i = 0; i < pedestrians.size(); ++i) {
    if (distance_to_rect(pedestrians[i], footprint) <= ped_radius) return CollisionRecord{i, ego_speed / kKmh};
  }
  return std::nullopt;
}

EpisodeLog run_episode(const ScenarioSpec& scenario, Variant variant, const EpisodeConfig& config,
                       const Policy* policy) {
  config.validate();
  ScenarioGeometry geometry = config.geometry;
  geometry.vehicle_length = config.vehicle.length;
  geometry.vehicle_width = config.vehicle.width;
  const ScenarioWorld world = build_scenario(scenario, geometry);

  const double dt = config.simulation.dt;
  const double vmax = config.vehicle.max_speed_kmh * kKmh;
  const int planner_ticks = std::max(1, ticks_of(config.simulation.planner_period, dt));
  const int command_delay = ticks_of(config.vehicle.brake_delay, dt);
  const int sensor_delay = ticks_of(config.sensor.tracking_delay, dt);
  const int max_ticks = ticks_of(config.simulation.max_duration, dt);
  const auto& peds = world.pedestrians;

  std::optional<PomdpPlanner> planner;
  if (uses_planner(variant)) {
    if (policy == nullptr) throw UsageError("the POMDP variants need a solved policy");
    planner.emplace(*policy);
  }

  std::seed_seq seq{config.sensor.rng_seed, scenario.seed};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  EpisodeLog log;
  log.scenario = scenario.name();
  log.variant = std::string(to_string(variant));
  log.dt = dt;
  log.ped_count = peds.size();

  Ego ego{world.ego_s, world.ego_t, world.ego_speed};
  if (planner) planner->reset(ego.s, ego.t, world.obstacles);

  std::vector<Snapshot> history;
  std::deque<Command> pending;
  Command planned;
  bool latched = false;
  bool restart_hold = false;

  for (int k = 0; k <= max_ticks; ++k) {
    const double time = k * dt;
    Snapshot snap{time, {ego.s, ego.t}, {}, {}};
    for (const auto& p : peds) {
      snap.peds.push_back(p.position(time));
      snap.speeds.push_back(p.speed_at(time));
    }
    history.push_back(snap);

    TickRecord rec;
    rec.time = time;
    rec.ego_s = ego.s;
    rec.ego_t = ego.t;
    rec.ego_v = ego.v;
    for (std::size_t i = 0; i < peds.size(); ++i) {
      rec.peds.push_back({snap.peds[i].s, snap.peds[i].t, snap.speeds[i], kNan, kNan, kNan});
    }

    // Delayed, noisy measurements of the pedestrians visible at that time.
    std::vector<Measurement> measurements;
    if (k >= sensor_delay) {
      const Snapshot& seen = history[static_cast<std::size_t>(k - sensor_delay)];
      for (std::size_t i = 0; i < peds.size(); ++i) {
        if (!occlusion_check(seen.ego, seen.peds[i], world.obstacles)) continue;
        Measurement m;
        m.id = peds[i].id;
        m.s = seen.peds[i].s + config.sensor.position_std * normal(rng);
        m.t = seen.peds[i].t + config.sensor.position_std * normal(rng);
        m.speed = std::max(0.0, seen.speeds[i] + config.sensor.speed_std * normal(rng));
        m.heading = peds[i].heading() + config.sensor.heading_std * normal(rng);
        measurements.push_back(m);
        rec.peds[i].s_tracked = m.s;
        rec.peds[i].t_tracked = m.t;
        rec.peds[i].v_tracked = m.speed;
      }
    }

    if (planner) {
      if (k % planner_ticks == 0) {
        const PlannerDecision d = planner->step(ego.s, ego.t, ego.v, measurements, world.obstacles);
        planned = {d.longitudinal, d.lateral};
        rec.planner_action = static_cast<int>(d.action);
        rec.hidden_mass = d.hidden_mass;
      }
    } else {
      // Speed keeping; after an emergency stop, wait until no measured pedestrian blocks the corridor.
      if (restart_hold) {
        const double half = 0.5 * config.vehicle.width + config.simulation.ped_radius + config.simulation.clear_margin;
        restart_hold = std::any_of(measurements.begin(), measurements.end(), [&](const Measurement& m) {
          return m.s > ego.s - 0.5 * config.vehicle.length && std::abs(m.t - ego.t) <= half;
        });
      }
      planned = {restart_hold || ego.v >= vmax ? 0.0 : config.vehicle.cruise_accel, 0.0};
    }

    if (uses_aeb(variant)) {
      std::vector<aeb::PedTrack> tracks;
      for (const Measurement& m : measurements) {
        tracks.push_back({m.id, {m.s, m.t}, {m.speed * std::cos(m.heading), m.speed * std::sin(m.heading)},
                          time - config.sensor.tracking_delay});
      }
      aeb::EgoTrajectory traj{ego.s, ego.t, ego.v, planned.longitudinal, vmax, config.vehicle.length,
                              config.vehicle.width};
      const aeb::AebDecision d = aeb::aeb_step(tracks, traj, config.aeb);
      rec.p_c = d.p_c;
      rec.risk = d.risk;
      const bool moving = ego.v > 0.0 || planned.longitudinal > 0.0;
      if (d.brake && moving && !latched) {
        latched = true;
        ++log.summary.emergency_brakes;
      }
    }

    Command issued = planned;
    if (latched) issued.longitudinal = config.aeb.a_max;
    pending.push_back(issued);
    Command applied;
    if (static_cast<int>(pending.size()) > command_delay) {
      applied = pending.front();
      pending.pop_front();
    }
    const double a = effective_accel(ego.v, applied.longitudinal, vmax);
    rec.a_cmd = issued.longitudinal;
    rec.a_applied = a;
    rec.brake = latched;

    integrate(ego, a, dt, vmax);
    const double lateral_step =
        0.5 * applied.lateral * config.simulation.planner_period * config.simulation.planner_period / planner_ticks;
    ego.t = std::clamp(ego.t + lateral_step, -config.vehicle.lateral_limit, config.vehicle.lateral_limit);
    if (latched && ego.v <= 0.0) {
      latched = false;
      restart_hold = true;
    }

    const double next_time = (k + 1) * dt;
    std::vector<Vec2> positions;
    for (const auto& p : peds) positions.push_back(p.position(next_time));
    const auto hit = detect_collision({ego.s, ego.t}, ego.v, config.vehicle.length, config.vehicle.width, positions,
                                      config.simulation.ped_radius);
    rec.collision = hit.has_value();
    log.ticks.push_back(std::move(rec));

    if (hit) {
      log.summary.collided = true;
      log.summary.collision_speed_kmh = hit->speed_kmh;
      log.summary.end_reason = "collision";
      break;
    }
    if (ego.s + 0.5 * config.vehicle.length >= world.exit_s) {
      log.summary.end_reason = "exit";
      break;
    }
    if (ego.v <= 0.0 && std::all_of(peds.begin(), peds.end(), [&](const ScriptedPedestrian& p) {
          return pedestrian_clear(p, next_time, ego, config);
        })) {
      log.summary.end_reason = "stopped_clear";
      break;
    }
    if (k == max_ticks) log.summary.end_reason = "timeout";
  }
  log.summary.duration = static_cast<double>(log.ticks.size()) * dt;
  return log;
}

}  // namespace pedplan::sim
