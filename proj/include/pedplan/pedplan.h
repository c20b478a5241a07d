#ifndef PEDPLAN_PEDPLAN_H
#define PEDPLAN_PEDPLAN_H

/* C interface of the occlusion-aware pedestrian planner.
 *
 * Every function returns a pedplan_status. On failure, pedplan_last_error()
 * describes the most recent error of the calling thread. Handles are opaque
 * and released with the matching *_free function. Strings returned through
 * char** out-parameters are released with pedplan_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PEDPLAN_BUILDING_LIBRARY)
#define PEDPLAN_API __declspec(dllexport)
#else
#define PEDPLAN_API __declspec(dllimport)
#endif
#else
#define PEDPLAN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pedplan_status {
  PEDPLAN_OK = 0,
  PEDPLAN_ERR_INVALID_ARGUMENT = 1,
  PEDPLAN_ERR_CONFIG = 2,
  PEDPLAN_ERR_IO = 3,
  PEDPLAN_ERR_NOT_CONVERGED = 4,
  PEDPLAN_ERR_USAGE = 5,
  PEDPLAN_ERR_MODEL = 6,
  PEDPLAN_ERR_DEGENERATE_BELIEF = 7,
  PEDPLAN_ERR_DIMENSION = 8,
  PEDPLAN_ERR_INTERNAL = 99
} pedplan_status;

typedef struct pedplan_config pedplan_config;
typedef struct pedplan_policy pedplan_policy;

typedef struct pedplan_metrics {
  int episodes;
  int collisions;
  int emergency_brakes;
  double mean_velocity_kmh;
  double mean_brake_accel;
  double mean_collision_kmh;
  size_t ticks;
} pedplan_metrics;

typedef void (*pedplan_log_fn)(const char* message, void* user);

PEDPLAN_API const char* pedplan_version(void);
PEDPLAN_API const char* pedplan_last_error(void);
PEDPLAN_API const char* pedplan_status_string(pedplan_status status);
PEDPLAN_API void pedplan_string_free(char* text);

/* Configuration */
PEDPLAN_API pedplan_status pedplan_config_default(pedplan_config** out);
PEDPLAN_API pedplan_status pedplan_config_load(const char* path, pedplan_config** out);
/* Overlay a JSON document on top of the current values. */
PEDPLAN_API pedplan_status pedplan_config_merge_json(pedplan_config* config, const char* json_text);
PEDPLAN_API pedplan_status pedplan_config_to_json(const pedplan_config* config, char** out_json);
PEDPLAN_API pedplan_status pedplan_config_set_cache_dir(pedplan_config* config, const char* dir);
PEDPLAN_API pedplan_status pedplan_config_set_logger(pedplan_config* config, pedplan_log_fn fn, void* user);
PEDPLAN_API void pedplan_config_free(pedplan_config* config);

/* Planner: load the cached Q table for a variant ("pomdp" or "pomdp_aeb") or solve and cache it. */
PEDPLAN_API pedplan_status pedplan_solve(const pedplan_config* config, const char* variant, pedplan_policy** out);
PEDPLAN_API pedplan_status pedplan_policy_info(const pedplan_policy* policy, size_t* state_count,
                                               size_t* action_count, size_t* iterations, double* residual,
                                               char hash_out[17]);
PEDPLAN_API void pedplan_policy_free(pedplan_policy* policy);

/* Simulation. variant is "aeb", "pomdp" or "pomdp_aeb"; scenario is a kind
 * name such as "CPAN-25" or "FP-near". csv_path may be NULL. */
PEDPLAN_API pedplan_status pedplan_run_episode(const pedplan_config* config, const char* scenario,
                                               double impact_fraction, const char* variant, uint64_t seed,
                                               const char* csv_path, pedplan_metrics* out_metrics);

/* Runs the configured suite; writes out_dir/<variant>/ when out_dir is not NULL.
 * out_summary (optional) receives the pretty-printed table. */
PEDPLAN_API pedplan_status pedplan_run_suite(const pedplan_config* config, const char* variant, const char* out_dir,
                                             pedplan_metrics* out_metrics, char** out_summary);

/* Reward-parameter sweep from a JSON spec file; writes the table to csv_path.
 * out_report (optional) receives the selected point per variant. */
PEDPLAN_API pedplan_status pedplan_sweep(const pedplan_config* config, const char* spec_path, const char* csv_path,
                                         char** out_report);

/* Greedy longitudinal actions over (s, t) at the lane centre. out_warnings
 * (optional) receives nearest-level warnings, one per line. */
PEDPLAN_API pedplan_status pedplan_export_slice(const pedplan_config* config, const char* variant,
                                                double ego_speed_kmh, double ped_speed_kmh, double ped_heading_deg,
                                                const char* csv_path, char** out_warnings);

#ifdef __cplusplus
}
#endif

#endif /* PEDPLAN_PEDPLAN_H */
