#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace pedplan::sim {

struct PedSample {
  double s_true = 0.0;
  double t_true = 0.0;
  double v_true = 0.0;
  double s_tracked;  // NaN when not measured this tick
  double t_tracked;
  double v_tracked;
};

struct TickRecord {
  double time = 0.0;
  double ego_s = 0.0;
  double ego_t = 0.0;
  double ego_v = 0.0;
  double a_cmd = 0.0;
  double a_applied = 0.0;
  std::vector<PedSample> peds;
  double p_c = 0.0;
  double risk = 0.0;
  bool brake = false;
  bool collision = false;
  double hidden_mass = 0.0;
  int planner_action = -1;  // -1 on ticks without a planner decision
};

struct EpisodeSummary {
  bool collided = false;
  double collision_speed_kmh = 0.0;
  int emergency_brakes = 0;
  double duration = 0.0;
  std::string end_reason;
};

struct EpisodeLog {
  std::string scenario;
  std::string variant;
  double dt = 0.05;
  std::size_t ped_count = 0;
  std::vector<TickRecord> ticks;
  EpisodeSummary summary;
};

/// Column order: time, ego_s, ego_t, ego_v, a_cmd, a_applied, then per
/// pedestrian i: ped{i}_s_true, ped{i}_t_true, ped{i}_v_true, ped{i}_s_tracked,
/// ped{i}_t_tracked, ped{i}_v_tracked, then p_c, risk, brake, collision.
std::vector<std::string> csv_header(std::size_t ped_count);
void write_csv(const EpisodeLog& log, std::ostream& out);
std::string to_csv(const EpisodeLog& log);
void write_csv_file(const EpisodeLog& log, const std::string& path);

}  // namespace pedplan::sim
