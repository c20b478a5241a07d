#include "harness/suite.hpp"

#include <filesystem>

#include "common/errors.hpp"

namespace pedplan::harness {

namespace fs = std::filesystem;

SuiteRun run_suite(const HarnessConfig& config, sim::Variant variant, const std::vector<sim::ScenarioSpec>& scenarios,
                   const sim::Policy* policy) {
  if (scenarios.empty()) throw UsageError("the suite contains no scenarios");
  SuiteRun run;
  for (const auto& spec : scenarios) run.logs.push_back(sim::run_episode(spec, variant, config.episode, policy));
  run.result = summarize(std::string(sim::to_string(variant)), run.logs);
  return run;
}

SuiteRun run_suite(const HarnessConfig& config, sim::Variant variant, const sim::Policy* policy) {
  return run_suite(config, variant, config.suite.scenarios(config.episode.geometry), policy);
}

void write_suite(const SuiteRun& run, const std::string& out_dir) {
  const fs::path dir = fs::path(out_dir) / run.result.variant;
  fs::create_directories(dir);
  for (const auto& log : run.logs) sim::write_csv_file(log, (dir / (log.scenario + ".csv")).string());
  write_summary_csv(run.result, (dir / "summary.csv").string());
}

}  // namespace pedplan::harness
