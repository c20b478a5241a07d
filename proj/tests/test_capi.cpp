#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pedplan/pedplan.h"

namespace fs = std::filesystem;

namespace {

const char* kCoarse = R"({
  "discretization": {
    "ego_speed_kmh": {"min": 0, "max": 50, "levels": 11},
    "ego_lateral_m": {"min": -1, "max": 1, "levels": 3},
    "ped_s_m": {"min": 0, "max": 50, "levels": 11},
    "ped_t_m": {"min": -5, "max": 5, "levels": 5},
    "ped_speed_mps": {"min": 0, "max": 2, "levels": 2},
    "ped_heading_deg": {"min": -90, "max": 90, "levels": 3}
  },
  "suite": {"kinds": ["CPAN-25"], "impact_fractions": [0.25], "extra": ["FP-near"]}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Fixture {
  fs::path dir;
  pedplan_config* cfg = nullptr;
  std::vector<std::string> messages;

  Fixture() {
    dir = fs::temp_directory_path() / "pedplan_test_capi";
    fs::remove_all(dir);
    fs::create_directories(dir);
    REQUIRE(pedplan_config_default(&cfg) == PEDPLAN_OK);
    REQUIRE(pedplan_config_merge_json(cfg, kCoarse) == PEDPLAN_OK);
    REQUIRE(pedplan_config_set_cache_dir(cfg, (dir / "cache").c_str()) == PEDPLAN_OK);
    REQUIRE(pedplan_config_set_logger(
                cfg, [](const char* m, void* user) { static_cast<Fixture*>(user)->messages.emplace_back(m); },
                this) == PEDPLAN_OK);
  }
  ~Fixture() { pedplan_config_free(cfg); }
};

}  // namespace

TEST_CASE("C API basics") {
  CHECK(std::string(pedplan_version()).size() > 0);
  CHECK(std::string(pedplan_status_string(PEDPLAN_ERR_CONFIG)).size() > 0);

  pedplan_config* cfg = nullptr;
  CHECK(pedplan_config_default(nullptr) == PEDPLAN_ERR_INVALID_ARGUMENT);
  CHECK(std::string(pedplan_last_error()).size() > 0);
  REQUIRE(pedplan_config_default(&cfg) == PEDPLAN_OK);
  CHECK(pedplan_config_merge_json(cfg, "{not json") == PEDPLAN_ERR_CONFIG);
  CHECK(pedplan_config_merge_json(cfg, R"({"unknown_key": 1})") == PEDPLAN_ERR_CONFIG);
  CHECK(pedplan_config_load("/nonexistent/config.json", &cfg) != PEDPLAN_OK);

  char* text = nullptr;
  REQUIRE(pedplan_config_to_json(cfg, &text) == PEDPLAN_OK);
  CHECK(std::string(text).find("\"profiles\"") != std::string::npos);
  pedplan_string_free(text);

  pedplan_metrics m{};
  CHECK(pedplan_run_episode(cfg, "CPXX", 0.0, "aeb", 1, nullptr, &m) == PEDPLAN_ERR_CONFIG);
  CHECK(pedplan_run_episode(cfg, "CPAN-25", 0.0, "mpc", 1, nullptr, &m) == PEDPLAN_ERR_CONFIG);
  CHECK(pedplan_run_episode(cfg, "CPAN-25", 0.9, "aeb", 1, nullptr, &m) == PEDPLAN_ERR_CONFIG);
  pedplan_policy* policy = nullptr;
  CHECK(pedplan_solve(cfg, "aeb", &policy) == PEDPLAN_ERR_USAGE);
  pedplan_config_free(cfg);
  pedplan_config_free(nullptr);
  pedplan_policy_free(nullptr);
}

TEST_CASE("C API episodes and outputs") {
  Fixture f;
  pedplan_metrics m{};
  const auto a = f.dir / "a.csv";
  const auto b = f.dir / "b.csv";
  REQUIRE(pedplan_run_episode(f.cfg, "CPAN-25", 0.25, "aeb", 7, a.c_str(), &m) == PEDPLAN_OK);
  CHECK(m.episodes == 1);
  CHECK(m.emergency_brakes == 1);
  REQUIRE(pedplan_run_episode(f.cfg, "CPAN-25", 0.25, "aeb", 7, b.c_str(), &m) == PEDPLAN_OK);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("time,", 0) == 0);

  pedplan_policy* policy = nullptr;
  REQUIRE(pedplan_solve(f.cfg, "pomdp", &policy) == PEDPLAN_OK);
  size_t states = 0, actions = 0, iterations = 0;
  double residual = 1.0;
  char hash[17] = {0};
  REQUIRE(pedplan_policy_info(policy, &states, &actions, &iterations, &residual, hash) == PEDPLAN_OK);
  CHECK(states == 11u * 3u * (11u * 5u * 2u * 3u + 1u));
  CHECK(actions == 15u);
  CHECK(residual <= 1e-6);
  CHECK(std::string(hash).size() == 16u);
  CHECK(fs::exists(f.dir / "cache" / ("q_" + std::string(hash) + ".bin")));
  pedplan_policy_free(policy);
  CHECK_FALSE(f.messages.empty());

  char* summary = nullptr;
  REQUIRE(pedplan_run_suite(f.cfg, "pomdp_aeb", (f.dir / "suite").c_str(), &m, &summary) == PEDPLAN_OK);
  CHECK(m.episodes == 2);
  CHECK(std::string(summary).find("CPAN-25_250") != std::string::npos);
  pedplan_string_free(summary);
  CHECK(fs::exists(f.dir / "suite" / "pomdp_aeb" / "summary.csv"));

  char* warnings = nullptr;
  REQUIRE(pedplan_export_slice(f.cfg, "pomdp", 46.8, 7.2, 90.0, (f.dir / "slice.csv").c_str(), &warnings) ==
          PEDPLAN_OK);
  CHECK(std::string(warnings).find("off-grid") != std::string::npos);
  pedplan_string_free(warnings);
  CHECK(fs::exists(f.dir / "slice.csv"));

  std::ofstream(f.dir / "sweep.json") << R"({"velocity_weight": [0.2, 0.5], "longitudinal_action_penalty": [-1],
                                             "p_appear": [0.2], "variants": ["pomdp_aeb"]})";
  char* report = nullptr;
  REQUIRE(pedplan_sweep(f.cfg, (f.dir / "sweep.json").c_str(), (f.dir / "sweep.csv").c_str(), &report) == PEDPLAN_OK);
  CHECK(std::string(report).find("pomdp_aeb") != std::string::npos);
  pedplan_string_free(report);
  const std::string table = slurp(f.dir / "sweep.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
  CHECK(pedplan_sweep(f.cfg, (f.dir / "missing.json").c_str(), (f.dir / "x.csv").c_str(), nullptr) == PEDPLAN_ERR_IO);
}
