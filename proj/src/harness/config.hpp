#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "model/pedestrian_pomdp.hpp"
#include "sim/scenario.hpp"
#include "sim/simulator.hpp"

namespace pedplan::harness {

struct PlannerProfile {
  ped::RewardParams reward;
  double p_appear = 0.01;
};

struct SolverSettings {
  double tolerance = 1e-6;
  int max_iterations = 10000;
};

struct SuiteSpec {
  double ego_speed_kmh = 50.0;
  std::vector<sim::ScenarioKind> kinds{sim::ScenarioKind::kCpaf, sim::ScenarioKind::kCpan25,
                                       sim::ScenarioKind::kCpan75, sim::ScenarioKind::kCpcn};
  std::vector<double> impact_fractions{0.0, 0.125, 0.25, 0.375, 0.5};
  std::vector<sim::ScenarioKind> extra{sim::ScenarioKind::kFpNear, sim::ScenarioKind::kFpStopShort,
                                       sim::ScenarioKind::kCpcnEmpty};
  std::uint64_t seed = 1;

  std::vector<sim::ScenarioSpec> scenarios(const sim::ScenarioGeometry& geometry) const;
};

struct HarnessConfig {
  /// Planner model without the per-variant reward and appearance parts.
  ped::ModelConfig model;
  SolverSettings solver;
  std::map<std::string, PlannerProfile> profiles;  // keyed by variant name
  sim::EpisodeConfig episode;
  SuiteSpec suite;
  std::string cache_dir = "cache";
  bool solve_if_missing = true;

  /// Complete planner model for a POMDP variant.
  ped::ModelConfig model_for(sim::Variant variant) const;
  void validate() const;
};

HarnessConfig default_config();
/// Keys absent from `j` keep their defaults; unknown keys are rejected.
HarnessConfig parse_config(const nlohmann::json& j);
HarnessConfig load_config(const std::string& path);
nlohmann::json to_json(const HarnessConfig& config);

/// Canonical description of everything that determines a solved Q table.
nlohmann::json model_json(const ped::ModelConfig& model, const SolverSettings& solver);

}  // namespace pedplan::harness
