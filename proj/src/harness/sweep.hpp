#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "harness/config.hpp"
#include "harness/metrics.hpp"
#include "harness/q_cache.hpp"

namespace pedplan::harness {

struct SweepSpec {
  std::vector<double> velocity_weight;
  std::vector<double> longitudinal_action_penalty;
  std::vector<double> p_appear;
  std::vector<sim::Variant> variants{sim::Variant::kPomdp, sim::Variant::kPomdpAeb};

  void validate() const;
};

SweepSpec parse_sweep_spec(const nlohmann::json& j);
SweepSpec load_sweep_spec(const std::string& path);

struct SweepPoint {
  sim::Variant variant = sim::Variant::kPomdp;
  double velocity_weight = 0.0;
  double longitudinal_action_penalty = 0.0;
  double p_appear = 0.0;
  std::string hash;
  bool converged = false;
  std::optional<Metrics> metrics;  // empty when the solve did not converge
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

/// One solve (cached by model hash) and one suite run per grid point and variant.
SweepResult run_sweep(const SweepSpec& spec, const HarnessConfig& config, const ProgressFn& progress = {});

/// Zero-collision point with the highest mean velocity; ties keep the first. Empty when none is feasible.
std::optional<std::size_t> select_best(const std::vector<SweepPoint>& points, sim::Variant variant);

void write_sweep_csv(const SweepResult& result, const std::string& path);

}  // namespace pedplan::harness
