#pragma once

#include <string>
#include <vector>

#include "harness/config.hpp"
#include "harness/metrics.hpp"
#include "sim/simulator.hpp"

namespace pedplan::harness {

struct SuiteRun {
  SuiteResult result;
  std::vector<sim::EpisodeLog> logs;
};

/// Runs `scenarios` in order. `policy` is required for the POMDP variants.
SuiteRun run_suite(const HarnessConfig& config, sim::Variant variant, const std::vector<sim::ScenarioSpec>& scenarios,
                   const sim::Policy* policy);

/// Runs the configured suite.
SuiteRun run_suite(const HarnessConfig& config, sim::Variant variant, const sim::Policy* policy);

/// Writes out_dir/<variant>/<scenario>.csv and out_dir/<variant>/summary.csv.
void write_suite(const SuiteRun& run, const std::string& out_dir);

}  // namespace pedplan::harness
