#include "pedplan/pedplan.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "common/errors.hpp"
#include "harness/config.hpp"
#include "harness/policy_slice.hpp"
#include "harness/q_cache.hpp"
#include "harness/suite.hpp"
#include "harness/sweep.hpp"

struct pedplan_config {
  pedplan::harness::HarnessConfig config;
  pedplan_log_fn log = nullptr;
  void* log_user = nullptr;

  pedplan::harness::ProgressFn progress() const {
    if (log == nullptr) return {};
    return [fn = log, user = log_user](const std::string& msg) { fn(msg.c_str(), user); };
  }
};

struct pedplan_policy {
  pedplan::sim::Policy policy;
  std::string hash;
};

namespace {

thread_local std::string g_last_error;

pedplan_status fail(pedplan_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
pedplan_status guarded(F&& body) {
  using namespace pedplan;
  try {
    body();
    g_last_error.clear();
    return PEDPLAN_OK;
  } catch (const ConfigError& e) {
    return fail(PEDPLAN_ERR_CONFIG, e.what());
  } catch (const IoError& e) {
    return fail(PEDPLAN_ERR_IO, e.what());
  } catch (const NotConvergedError& e) {
    return fail(PEDPLAN_ERR_NOT_CONVERGED, e.what());
  } catch (const UsageError& e) {
    return fail(PEDPLAN_ERR_USAGE, e.what());
  } catch (const ModelValidationError& e) {
    return fail(PEDPLAN_ERR_MODEL, e.what());
  } catch (const DegenerateBeliefError& e) {
    return fail(PEDPLAN_ERR_DEGENERATE_BELIEF, e.what());
  } catch (const DimensionError& e) {
    return fail(PEDPLAN_ERR_DIMENSION, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(PEDPLAN_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(PEDPLAN_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PEDPLAN_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void fill(const pedplan::harness::Metrics& m, pedplan_metrics* out) {
  if (out == nullptr) return;
  out->episodes = m.episodes;
  out->collisions = m.collisions;
  out->emergency_brakes = m.emergency_brakes;
  out->mean_velocity_kmh = m.mean_velocity_kmh;
  out->mean_brake_accel = m.mean_brake_accel;
  out->mean_collision_kmh = m.mean_collision_kmh;
  out->ticks = m.ticks;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw std::invalid_argument(std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* pedplan_version(void) { return PEDPLAN_VERSION_STRING; }

const char* pedplan_last_error(void) { return g_last_error.c_str(); }

const char* pedplan_status_string(pedplan_status status) {
  switch (status) {
    case PEDPLAN_OK:
      return "ok";
    case PEDPLAN_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case PEDPLAN_ERR_CONFIG:
      return "configuration error";
    case PEDPLAN_ERR_IO:
      return "i/o error";
    case PEDPLAN_ERR_NOT_CONVERGED:
      return "not converged";
    case PEDPLAN_ERR_USAGE:
      return "usage error";
    case PEDPLAN_ERR_MODEL:
      return "invalid model";
    case PEDPLAN_ERR_DEGENERATE_BELIEF:
      return "degenerate belief";
    case PEDPLAN_ERR_DIMENSION:
      return "dimension mismatch";
    case PEDPLAN_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void pedplan_string_free(char* text) { std::free(text); }

pedplan_status pedplan_config_default(pedplan_config** out) {
  if (out == nullptr) return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "out must not be NULL");
  return guarded([&] { *out = new pedplan_config{pedplan::harness::default_config()}; });
}

pedplan_status pedplan_config_load(const char* path, pedplan_config** out) {
  if (path == nullptr || out == nullptr) return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "path and out must not be NULL");
  return guarded([&] { *out = new pedplan_config{pedplan::harness::load_config(path)}; });
}

pedplan_status pedplan_config_merge_json(pedplan_config* config, const char* json_text) {
  if (config == nullptr || json_text == nullptr) {
    return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "config and json_text must not be NULL");
  }
  return guarded([&] {
    nlohmann::json patch;
    try {
      patch = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw pedplan::ConfigError(e.what());
    }
    nlohmann::json merged = pedplan::harness::to_json(config->config);
    merged.merge_patch(patch);
    config->config = pedplan::harness::parse_config(merged);
  });
}

pedplan_status pedplan_config_to_json(const pedplan_config* config, char** out_json) {
  if (config == nullptr || out_json == nullptr) {
    return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "config and out_json must not be NULL");
  }
  return guarded([&] { *out_json = dup_string(pedplan::harness::to_json(config->config).dump(2) + "\n"); });
}

pedplan_status pedplan_config_set_cache_dir(pedplan_config* config, const char* dir) {
  if (config == nullptr || dir == nullptr) return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "config and dir must not be NULL");
  return guarded([&] { config->config.cache_dir = dir; });
}

pedplan_status pedplan_config_set_logger(pedplan_config* config, pedplan_log_fn fn, void* user) {
  if (config == nullptr) return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "config must not be NULL");
  config->log = fn;
  config->log_user = user;
  return PEDPLAN_OK;
}

void pedplan_config_free(pedplan_config* config) { delete config; }

pedplan_status pedplan_solve(const pedplan_config* config, const char* variant, pedplan_policy** out) {
  if (config == nullptr || variant == nullptr || out == nullptr) {
    return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "config, variant and out must not be NULL");
  }
  return guarded([&] {
    const auto v = pedplan::sim::parse_variant(variant);
    auto policy = pedplan::harness::policy_for(config->config, v, config->progress());
    const std::string hash = pedplan::harness::model_hash(config->config.model_for(v), config->config.solver);
    *out = new pedplan_policy{std::move(policy), hash};
  });
}

pedplan_status pedplan_policy_info(const pedplan_policy* policy, size_t* state_count, size_t* action_count,
                                   size_t* iterations, double* residual, char hash_out[17]) {
  if (policy == nullptr) return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "policy must not be NULL");
  const auto& q = *policy->policy.q;
  if (state_count) *state_count = q.state_count;
  if (action_count) *action_count = q.action_count;
  if (iterations) *iterations = q.iterations;
  if (residual) *residual = q.residual;
  if (hash_out) std::snprintf(hash_out, 17, "%s", policy->hash.c_str());
  return PEDPLAN_OK;
}

void pedplan_policy_free(pedplan_policy* policy) { delete policy; }

pedplan_status pedplan_run_episode(const pedplan_config* config, const char* scenario, double impact_fraction,
                                   const char* variant, uint64_t seed, const char* csv_path,
                                   pedplan_metrics* out_metrics) {
  if (config == nullptr || scenario == nullptr || variant == nullptr) {
    return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "config, scenario and variant must not be NULL");
  }
  return guarded([&] {
    using namespace pedplan;
    const auto& cfg = config->config;
    const auto v = sim::parse_variant(variant);
    const auto spec = sim::ScenarioSpec::make(sim::parse_scenario_kind(scenario), impact_fraction,
                                              cfg.episode.geometry, cfg.suite.ego_speed_kmh, seed);
    std::optional<sim::Policy> policy;
    if (sim::uses_planner(v)) policy = harness::policy_for(cfg, v, config->progress());
    const auto log = sim::run_episode(spec, v, cfg.episode, policy ? &*policy : nullptr);
    if (csv_path != nullptr) sim::write_csv_file(log, csv_path);
    fill(harness::compute_metrics(std::span(&log, 1)), out_metrics);
  });
}

pedplan_status pedplan_run_suite(const pedplan_config* config, const char* variant, const char* out_dir,
                                 pedplan_metrics* out_metrics, char** out_summary) {
  if (config == nullptr || variant == nullptr) return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "config and variant must not be NULL");
  return guarded([&] {
    using namespace pedplan;
    const auto& cfg = config->config;
    const auto v = sim::parse_variant(variant);
    std::optional<sim::Policy> policy;
    if (sim::uses_planner(v)) policy = harness::policy_for(cfg, v, config->progress());
    const auto run = harness::run_suite(cfg, v, policy ? &*policy : nullptr);
    if (out_dir != nullptr) harness::write_suite(run, out_dir);
    fill(run.result.aggregate, out_metrics);
    if (out_summary != nullptr) *out_summary = dup_string(harness::format_summary(run.result));
  });
}

pedplan_status pedplan_sweep(const pedplan_config* config, const char* spec_path, const char* csv_path,
                             char** out_report) {
  if (config == nullptr || spec_path == nullptr || csv_path == nullptr) {
    return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "config, spec_path and csv_path must not be NULL");
  }
  return guarded([&] {
    using namespace pedplan;
    const auto spec = harness::load_sweep_spec(spec_path);
    const auto result = harness::run_sweep(spec, config->config, config->progress());
    harness::write_sweep_csv(result, csv_path);
    if (out_report != nullptr) {
      std::ostringstream report;
      for (auto v : spec.variants) {
        report << sim::to_string(v) << ": ";
        const auto best = harness::select_best(result.points, v);
        if (!best) {
          report << "none feasible\n";
          continue;
        }
        const auto& p = result.points[*best];
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "velocity_weight=%.9g longitudinal_action_penalty=%.9g p_appear=%.9g v=%.3f km/h brakes=%d\n",
                      p.velocity_weight, p.longitudinal_action_penalty, p.p_appear, p.metrics->mean_velocity_kmh,
                      p.metrics->emergency_brakes);
        report << buf;
      }
      for (const auto& p : result.points) {
        if (!p.converged) report << "not converged: " << sim::to_string(p.variant) << " q_" << p.hash << '\n';
      }
      *out_report = dup_string(report.str());
    }
  });
}

pedplan_status pedplan_export_slice(const pedplan_config* config, const char* variant, double ego_speed_kmh,
                                    double ped_speed_kmh, double ped_heading_deg, const char* csv_path,
                                    char** out_warnings) {
  if (config == nullptr || variant == nullptr || csv_path == nullptr) {
    return fail(PEDPLAN_ERR_INVALID_ARGUMENT, "config, variant and csv_path must not be NULL");
  }
  return guarded([&] {
    using namespace pedplan;
    const auto policy = harness::policy_for(config->config, sim::parse_variant(variant), config->progress());
    const auto slice = harness::export_policy_slice(*policy.model, *policy.q, ego_speed_kmh, ped_speed_kmh,
                                                    ped_heading_deg);
    std::ofstream out(csv_path);
    if (!out) throw IoError(std::string("cannot write '") + csv_path + "'");
    harness::write_slice_csv(slice, out);
    if (!out) throw IoError(std::string("failed writing '") + csv_path + "'");
    if (out_warnings != nullptr) {
      std::string text;
      for (const auto& w : slice.warnings) text += w + "\n";
      *out_warnings = dup_string(text);
    }
  });
}

}  // extern "C"
