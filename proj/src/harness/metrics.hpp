#pragma once

#include <span>
#include <string>
#include <vector>

#include "sim/episode_log.hpp"

namespace pedplan::harness {

struct Metrics {
  int episodes = 0;
  int collisions = 0;
  int emergency_brakes = 0;
  double mean_velocity_kmh = 0.0;
  double mean_brake_accel = 0.0;  // over ticks with negative applied acceleration, 0 if none
  double mean_collision_kmh = 0.0;  // 0 without collisions
  std::size_t ticks = 0;
};

struct EpisodeMetrics {
  std::string scenario;
  std::string end_reason;
  Metrics metrics;
};

struct SuiteResult {
  std::string variant;
  std::vector<EpisodeMetrics> episodes;
  Metrics aggregate;
};

/// Aggregate over every tick of every episode; invariant under episode order.
Metrics compute_metrics(std::span<const sim::EpisodeLog> logs);
SuiteResult summarize(const std::string& variant, std::span<const sim::EpisodeLog> logs);

void write_summary_csv(const SuiteResult& result, const std::string& path);
std::string format_summary(const SuiteResult& result);

}  // namespace pedplan::harness
