// Command-line front end over the C API.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "pedplan/pedplan.h"

namespace {

struct ConfigHandle {
  pedplan_config* ptr = nullptr;
  ~ConfigHandle() { pedplan_config_free(ptr); }
};

int report(pedplan_status status) {
  if (status == PEDPLAN_OK) return 0;
  std::fprintf(stderr, "error (%s): %s\n", pedplan_status_string(status), pedplan_last_error());
  return 1;
}

void log_line(const char* message, void*) { std::fprintf(stderr, "%s\n", message); }

void print_metrics(const pedplan_metrics& m) {
  std::printf("episodes %d  collisions %d  emergency_brakes %d  v %.3f km/h  a %.3f m/s^2  dv %.3f km/h\n",
              m.episodes, m.collisions, m.emergency_brakes, m.mean_velocity_kmh, m.mean_brake_accel,
              m.mean_collision_kmh);
}

void print_and_free(char* text, std::FILE* stream) {
  if (text != nullptr) std::fputs(text, stream);
  pedplan_string_free(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occlusion-aware pedestrian planner with emergency braking"};
  app.require_subcommand(1);
  std::string config_path;
  std::string cache_dir;
  app.add_option("--config", config_path, "JSON configuration (defaults when omitted)");
  app.add_option("--cache-dir", cache_dir, "Q table cache directory (overrides the config)");
  app.set_version_flag("--version", pedplan_version());

  auto* show = app.add_subcommand("config", "Print the effective configuration as JSON");

  auto* solve = app.add_subcommand("solve", "Build and solve the planner model, caching the Q table");
  std::string solve_variant = "pomdp_aeb";
  solve->add_option("--variant", solve_variant, "pomdp or pomdp_aeb")->check(CLI::IsMember({"pomdp", "pomdp_aeb"}));

  auto* run = app.add_subcommand("run", "Run one scenario");
  std::string scenario = "CPAN-25";
  std::string run_variant = "pomdp_aeb";
  double impact = 0.0;
  std::uint64_t seed = 1;
  std::string run_out;
  run->add_option("--scenario", scenario, "CPAF, CPAN-25, CPAN-75, CPCN, FP-near, FP-stop-short or CPCN-empty")
      ->required();
  run->add_option("--variant", run_variant, "aeb, pomdp or pomdp_aeb")
      ->check(CLI::IsMember({"aeb", "pomdp", "pomdp_aeb"}));
  run->add_option("--impact", impact, "Impact fraction in [0, 0.5]");
  run->add_option("--seed", seed, "Scenario seed");
  run->add_option("--out", run_out, "Episode CSV path");

  auto* suite = app.add_subcommand("suite", "Run the configured scenario suite");
  std::string suite_variant = "pomdp_aeb";
  std::string out_dir = "results";
  suite->add_option("--variant", suite_variant, "aeb, pomdp or pomdp_aeb")
      ->check(CLI::IsMember({"aeb", "pomdp", "pomdp_aeb"}));
  suite->add_option("--out-dir", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Reward-parameter sweep");
  std::string spec_path;
  std::string sweep_out = "sweep.csv";
  sweep->add_option("--spec", spec_path, "Sweep JSON spec")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "Sweep table CSV path");

  auto* slice = app.add_subcommand("slice", "Export a policy slice over (s, t)");
  double ego_speed = 46.8;
  double ped_speed = 7.2;
  double ped_heading = 90.0;
  std::string slice_variant = "pomdp_aeb";
  std::string slice_out = "slice.csv";
  slice->add_option("--ego-speed", ego_speed, "Ego speed in km/h");
  slice->add_option("--ped-speed", ped_speed, "Pedestrian speed in km/h");
  slice->add_option("--ped-heading", ped_heading, "Pedestrian heading in degrees");
  slice->add_option("--variant", slice_variant, "pomdp or pomdp_aeb")->check(CLI::IsMember({"pomdp", "pomdp_aeb"}));
  slice->add_option("--out", slice_out, "Slice CSV path");

  CLI11_PARSE(app, argc, argv);

  ConfigHandle config;
  pedplan_status status =
      config_path.empty() ? pedplan_config_default(&config.ptr) : pedplan_config_load(config_path.c_str(), &config.ptr);
  if (status != PEDPLAN_OK) return report(status);
  if (!cache_dir.empty() && (status = pedplan_config_set_cache_dir(config.ptr, cache_dir.c_str())) != PEDPLAN_OK) {
    return report(status);
  }
  pedplan_config_set_logger(config.ptr, log_line, nullptr);

  if (*show) {
    char* text = nullptr;
    if ((status = pedplan_config_to_json(config.ptr, &text)) != PEDPLAN_OK) return report(status);
    print_and_free(text, stdout);
    return 0;
  }
  if (*solve) {
    pedplan_policy* policy = nullptr;
    if ((status = pedplan_solve(config.ptr, solve_variant.c_str(), &policy)) != PEDPLAN_OK) return report(status);
    std::size_t states = 0;
    std::size_t actions = 0;
    std::size_t iterations = 0;
    double residual = 0.0;
    char hash[17] = {0};
    pedplan_policy_info(policy, &states, &actions, &iterations, &residual, hash);
    std::printf("q_%s: %zu states, %zu actions, %zu sweeps, residual %.3g\n", hash, states, actions, iterations,
                residual);
    pedplan_policy_free(policy);
    return 0;
  }
  if (*run) {
    pedplan_metrics m{};
    status = pedplan_run_episode(config.ptr, scenario.c_str(), impact, run_variant.c_str(), seed,
                                 run_out.empty() ? nullptr : run_out.c_str(), &m);
    if (status != PEDPLAN_OK) return report(status);
    print_metrics(m);
    return 0;
  }
  if (*suite) {
    pedplan_metrics m{};
    char* summary = nullptr;
    status = pedplan_run_suite(config.ptr, suite_variant.c_str(), out_dir.c_str(), &m, &summary);
    if (status != PEDPLAN_OK) return report(status);
    print_and_free(summary, stdout);
    return 0;
  }
  if (*sweep) {
    char* text = nullptr;
    if ((status = pedplan_sweep(config.ptr, spec_path.c_str(), sweep_out.c_str(), &text)) != PEDPLAN_OK) {
      return report(status);
    }
    print_and_free(text, stdout);
    return 0;
  }
  if (*slice) {
    char* warnings = nullptr;
    status = pedplan_export_slice(config.ptr, slice_variant.c_str(), ego_speed, ped_speed, ped_heading,
                                  slice_out.c_str(), &warnings);
    if (status != PEDPLAN_OK) return report(status);
    print_and_free(warnings, stderr);
    std::printf("wrote %s\n", slice_out.c_str());
    return 0;
  }
  return 0;
}
