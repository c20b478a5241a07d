#include "harness/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "common/errors.hpp"

namespace pedplan::harness {

namespace {

struct Partial {
  double speed_sum = 0.0;
  std::size_t ticks = 0;
  double brake_sum = 0.0;
  std::size_t brake_ticks = 0;
  double collision_sum = 0.0;
  int collisions = 0;
  int brakes = 0;

  auto key() const { return std::tie(speed_sum, ticks, brake_sum, brake_ticks, collision_sum, collisions, brakes); }
};

Partial partial_of(const sim::EpisodeLog& log) {
  Partial p;
  for (const auto& r : log.ticks) {
    p.speed_sum += r.ego_v * 3.6;
    ++p.ticks;
    if (r.a_applied < 0.0) {
      p.brake_sum += r.a_applied;
      ++p.brake_ticks;
    }
  }
  if (log.summary.collided) {
    p.collisions = 1;
    p.collision_sum = log.summary.collision_speed_kmh;
  }
  p.brakes = log.summary.emergency_brakes;
  return p;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

Metrics compute_metrics(std::span<const sim::EpisodeLog> logs) {
  if (logs.empty()) throw UsageError("compute_metrics needs at least one episode");
  std::vector<Partial> parts;
  for (const auto& log : logs) parts.push_back(partial_of(log));
  // Fixed summation order regardless of the episode order.
  std::sort(parts.begin(), parts.end(), [](const Partial& a, const Partial& b) { return a.key() < b.key(); });
  Partial total;
  for (const auto& p : parts) {
    total.speed_sum += p.speed_sum;
    total.ticks += p.ticks;
    total.brake_sum += p.brake_sum;
    total.brake_ticks += p.brake_ticks;
    total.collision_sum += p.collision_sum;
    total.collisions += p.collisions;
    total.brakes += p.brakes;
  }
  Metrics m;
  m.episodes = static_cast<int>(logs.size());
  m.collisions = total.collisions;
  m.emergency_brakes = total.brakes;
  m.ticks = total.ticks;
  m.mean_velocity_kmh = total.ticks ? total.speed_sum / static_cast<double>(total.ticks) : 0.0;
  m.mean_brake_accel = total.brake_ticks ? total.brake_sum / static_cast<double>(total.brake_ticks) : 0.0;
  m.mean_collision_kmh = total.collisions ? total.collision_sum / total.collisions : 0.0;
  return m;
}

SuiteResult summarize(const std::string& variant, std::span<const sim::EpisodeLog> logs) {
  SuiteResult r;
  r.variant = variant;
  for (const auto& log : logs) {
    r.episodes.push_back({log.scenario, log.summary.end_reason, compute_metrics(std::span(&log, 1))});
  }
  r.aggregate = compute_metrics(logs);
  return r;
}

void write_summary_csv(const SuiteResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "scenario,collisions,emergency_brakes,mean_velocity_kmh,mean_brake_accel,mean_collision_kmh,ticks,end_reason\n";
  auto row = [&](const std::string& name, const Metrics& m, const std::string& reason) {
    out << name << ',' << m.collisions << ',' << m.emergency_brakes << ',' << fmt(m.mean_velocity_kmh) << ','
        << fmt(m.mean_brake_accel) << ',' << fmt(m.mean_collision_kmh) << ',' << m.ticks << ',' << reason << '\n';
  };
  for (const auto& e : result.episodes) row(e.scenario, e.metrics, e.end_reason);
  row("ALL", result.aggregate, "");
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string format_summary(const SuiteResult& result) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %5s %5s %9s %9s %9s  %s\n", "scenario", "coll", "brake", "v_kmh", "a_mps2",
                "dv_kmh", "end");
  out << "variant " << result.variant << '\n' << line;
  auto row = [&](const std::string& name, const Metrics& m, const std::string& reason) {
    std::snprintf(line, sizeof line, "%-16s %5d %5d %9.2f %9.2f %9.2f  %s\n", name.c_str(), m.collisions,
                  m.emergency_brakes, m.mean_velocity_kmh, m.mean_brake_accel, m.mean_collision_kmh, reason.c_str());
    out << line;
  };
  for (const auto& e : result.episodes) row(e.scenario, e.metrics, e.end_reason);
  row("ALL", result.aggregate, "");
  return out.str();
}

}  // namespace pedplan::harness
