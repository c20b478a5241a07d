#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "common/errors.hpp"
#include "harness/config.hpp"
#include "harness/metrics.hpp"
#include "harness/policy_slice.hpp"
#include "harness/q_cache.hpp"
#include "harness/suite.hpp"
#include "harness/sweep.hpp"

using namespace pedplan;
using namespace pedplan::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pedplan_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

HarnessConfig coarse_config(const std::string& cache) {
  nlohmann::json j = {
      {"discretization",
       {{"ego_speed_kmh", {{"min", 0.0}, {"max", 50.0}, {"levels", 11}}},
        {"ego_lateral_m", {{"min", -1.0}, {"max", 1.0}, {"levels", 3}}},
        {"ped_s_m", {{"min", 0.0}, {"max", 50.0}, {"levels", 11}}},
        {"ped_t_m", {{"min", -5.0}, {"max", 5.0}, {"levels", 5}}},
        {"ped_speed_mps", {{"min", 0.0}, {"max", 2.0}, {"levels", 2}}},
        {"ped_heading_deg", {{"min", -90.0}, {"max", 90.0}, {"levels", 3}}}}},
      {"cache_dir", cache}};
  return parse_config(j);
}

sim::EpisodeLog synthetic(double speed_kmh, std::size_t ticks, bool collided = false, double collision_kmh = 0.0,
                          double accel = 0.0) {
  sim::EpisodeLog log;
  log.scenario = "synthetic";
  log.variant = "aeb";
  for (std::size_t i = 0; i < ticks; ++i) {
    sim::TickRecord r;
    r.time = 0.05 * static_cast<double>(i);
    r.ego_v = speed_kmh / 3.6;
    r.a_applied = accel;
    log.ticks.push_back(r);
  }
  log.summary.collided = collided;
  log.summary.collision_speed_kmh = collision_kmh;
  return log;
}

}  // namespace

TEST_CASE("config round trip and validation") {
  const auto def = default_config();
  CHECK_NOTHROW(def.validate());
  const auto j = to_json(def);
  CHECK(to_json(parse_config(j)) == j);

  CHECK_THROWS_AS(parse_config(nlohmann::json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json{{"solver", {{"discount", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json{{"aeb", {{"a_max", 3.0}}}}), ConfigError);

  // A partial profile only overrides the given fields.
  const auto patched = parse_config(nlohmann::json{{"profiles", {{"pomdp", {{"p_appear", 0.3}}}}}});
  CHECK(patched.profiles.at("pomdp").p_appear == 0.3);
  CHECK(patched.profiles.at("pomdp").reward.velocity_weight == def.profiles.at("pomdp").reward.velocity_weight);
  CHECK_THROWS_AS(def.model_for(sim::Variant::kAebOnly), UsageError);
}

TEST_CASE("model hash") {
  const auto cfg = default_config();
  auto a = cfg.model_for(sim::Variant::kPomdp);
  auto b = a;
  CHECK(model_hash(a, cfg.solver) == model_hash(b, cfg.solver));
  CHECK(model_hash(a, cfg.solver).size() == 16u);
  b.reward.velocity_weight += 0.01;
  CHECK(model_hash(a, cfg.solver) != model_hash(b, cfg.solver));
  // Appearance only matters with an offline occlusion.
  b = a;
  b.appearance.p_appear = 0.5;
  CHECK(model_hash(a, cfg.solver) == model_hash(b, cfg.solver));
  b.occlusion.obstacles.push_back({5.0, 10.0, -4.0, -2.0});
  a.occlusion = b.occlusion;
  CHECK(model_hash(a, cfg.solver) != model_hash(b, cfg.solver));
  auto tighter = cfg.solver;
  tighter.tolerance = 1e-8;
  CHECK(model_hash(a, cfg.solver) != model_hash(a, tighter));
}

TEST_CASE("Q table files") {
  const auto dir = scratch("qcache");
  pomdp::QValueTable q;
  q.state_count = 3;
  q.action_count = 2;
  q.values = {1.0, -2.5, 3.25, 1e-300, -0.0, 7.0};
  q.iterations = 42;
  q.residual = 1e-7;
  q.tolerance = 1e-6;
  const auto path = (dir / "q.bin").string();
  write_q_table(q, path);
  const auto r = read_q_table(path);
  CHECK(r.state_count == 3u);
  CHECK(r.action_count == 2u);
  CHECK(r.iterations == 42u);
  CHECK(r.values == q.values);
  CHECK(r.residual == q.residual);

  std::ofstream(dir / "junk.bin") << "not a table";
  CHECK_THROWS_AS(read_q_table((dir / "junk.bin").string()), IoError);
  CHECK_THROWS_AS(read_q_table((dir / "missing.bin").string()), IoError);

  auto cfg = coarse_config(dir.string());
  const auto model = cfg.model_for(sim::Variant::kPomdp);
  CHECK_THROWS_AS(load_or_solve(model, cfg.solver, dir.string(), false), UsageError);
  const auto solved = load_or_solve(model, cfg.solver, dir.string(), true);
  CHECK(fs::exists(dir / ("q_" + model_hash(model, cfg.solver) + ".bin")));
  const auto cached = load_or_solve(model, cfg.solver, dir.string(), false);
  CHECK(cached->values == solved->values);
}

TEST_CASE("metrics") {
  SUBCASE("hazard-free cruise") {
    std::vector<sim::EpisodeLog> logs{synthetic(50.0, 100)};
    const auto m = compute_metrics(logs);
    CHECK(m.mean_velocity_kmh == doctest::Approx(50.0));
    CHECK(m.mean_brake_accel == 0.0);
    CHECK(m.collisions == 0);
    CHECK(m.mean_collision_kmh == 0.0);
  }
  SUBCASE("single collision") {
    std::vector<sim::EpisodeLog> logs{synthetic(50.0, 10), synthetic(30.0, 10, true, 10.0, -4.0), synthetic(40.0, 5)};
    const auto m = compute_metrics(logs);
    CHECK(m.collisions == 1);
    CHECK(m.mean_collision_kmh == doctest::Approx(10.0));
    CHECK(m.mean_brake_accel == doctest::Approx(-4.0));
    CHECK(m.mean_velocity_kmh == doctest::Approx((500.0 + 300.0 + 200.0) / 25.0));
  }
  SUBCASE("episode order does not matter") {
    std::vector<sim::EpisodeLog> logs;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 12; ++i) logs.push_back(synthetic(u(rng), 7 + i, i % 5 == 0, u(rng), -u(rng) / 5.0));
    const auto ref = compute_metrics(logs);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(logs.begin(), logs.end(), rng);
      const auto m = compute_metrics(logs);
      CHECK(m.mean_velocity_kmh == ref.mean_velocity_kmh);
      CHECK(m.mean_brake_accel == ref.mean_brake_accel);
      CHECK(m.mean_collision_kmh == ref.mean_collision_kmh);
    }
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(compute_metrics(std::vector<sim::EpisodeLog>{}), UsageError);
  }
}

TEST_CASE("suite runs") {
  const auto dir = scratch("suite");
  auto cfg = coarse_config((dir / "cache").string());
  CHECK_THROWS_AS(run_suite(cfg, sim::Variant::kAebOnly, std::vector<sim::ScenarioSpec>{}, nullptr), UsageError);

  SUBCASE("false positives under AEB-only") {
    std::vector<sim::ScenarioSpec> fp{sim::ScenarioSpec::make(sim::ScenarioKind::kFpNear, 0.0, cfg.episode.geometry),
                                      sim::ScenarioSpec::make(sim::ScenarioKind::kFpStopShort, 0.0, cfg.episode.geometry)};
    const auto run = run_suite(cfg, sim::Variant::kAebOnly, fp, nullptr);
    CHECK(run.result.aggregate.emergency_brakes == 0);
    CHECK(run.result.aggregate.collisions == 0);
    write_suite(run, (dir / "out").string());
    CHECK(fs::exists(dir / "out" / "aeb" / "FP-near.csv"));
    CHECK(fs::exists(dir / "out" / "aeb" / "summary.csv"));
  }
  SUBCASE("single-point sweep equals a suite run") {
    cfg.suite.kinds = {sim::ScenarioKind::kCpan25};
    cfg.suite.impact_fractions = {0.25};
    cfg.suite.extra = {sim::ScenarioKind::kCpcnEmpty};
    SweepSpec spec;
    const auto& prof = cfg.profiles.at("pomdp_aeb");
    spec.velocity_weight = {prof.reward.velocity_weight};
    spec.longitudinal_action_penalty = {prof.reward.longitudinal_action_penalty};
    spec.p_appear = {prof.p_appear};
    spec.variants = {sim::Variant::kPomdpAeb};
    const auto sweep = run_sweep(spec, cfg);
    REQUIRE(sweep.points.size() == 1u);
    REQUIRE(sweep.points[0].metrics);
    const auto policy = policy_for(cfg, sim::Variant::kPomdpAeb);
    const auto direct = run_suite(cfg, sim::Variant::kPomdpAeb, &policy).result.aggregate;
    CHECK(sweep.points[0].metrics->mean_velocity_kmh == direct.mean_velocity_kmh);
    CHECK(sweep.points[0].metrics->emergency_brakes == direct.emergency_brakes);
    CHECK(sweep.points[0].hash == model_hash(cfg.model_for(sim::Variant::kPomdpAeb), cfg.solver));
    write_sweep_csv(sweep, (dir / "sweep.csv").string());
    CHECK(fs::exists(dir / "sweep.csv"));
  }
}

TEST_CASE("sweep spec and selection rule") {
  const auto spec = parse_sweep_spec(nlohmann::json{
      {"velocity_weight", {0.1, 0.2}}, {"longitudinal_action_penalty", {-1.0}}, {"p_appear", {0.01}},
      {"variants", {"pomdp_aeb"}}});
  CHECK(spec.velocity_weight.size() == 2u);
  CHECK(spec.variants == std::vector<sim::Variant>{sim::Variant::kPomdpAeb});
  CHECK_THROWS_AS(parse_sweep_spec(nlohmann::json{{"velocity_weight", {0.1}}, {"extra", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_sweep_spec(nlohmann::json{{"velocity_weight", {0.1}},
                                                  {"longitudinal_action_penalty", {-1.0}},
                                                  {"p_appear", {0.1}},
                                                  {"variants", {"aeb"}}}),
                  ConfigError);

  auto point = [](double v, int collisions, sim::Variant variant = sim::Variant::kPomdp) {
    SweepPoint p;
    p.variant = variant;
    p.converged = true;
    Metrics m;
    m.mean_velocity_kmh = v;
    m.collisions = collisions;
    p.metrics = m;
    return p;
  };
  std::vector<SweepPoint> pts{point(40.0, 1), point(30.0, 0)};
  CHECK(select_best(pts, sim::Variant::kPomdp) == 1u);
  pts.push_back(point(30.0, 0));
  pts.push_back(point(35.0, 0, sim::Variant::kPomdpAeb));
  CHECK(select_best(pts, sim::Variant::kPomdp) == 1u);
  CHECK(select_best(pts, sim::Variant::kPomdpAeb) == 3u);
  CHECK_FALSE(select_best({point(40.0, 2)}, sim::Variant::kPomdp));
  SweepPoint unsolved;
  CHECK_FALSE(select_best({unsolved}, sim::Variant::kPomdp));
}

TEST_CASE("policy slices") {
  const auto dir = scratch("slice");
  auto cfg = coarse_config((dir / "cache").string());
  const auto policy = policy_for(cfg, sim::Variant::kPomdp);

  SUBCASE("indifferent values give the zero action everywhere") {
    pomdp::QValueTable zero;
    zero.state_count = policy.model->state_count();
    zero.action_count = policy.model->action_count();
    zero.values.assign(zero.state_count * zero.action_count, 0.0);
    const auto s = export_policy_slice(*policy.model, zero, 30.0, 7.2, 90.0);
    for (const auto& row : s.action)
      for (double a : row) CHECK(a == 0.0);
    CHECK(braking_onset_distance(s) == -1.0);
  }
  SUBCASE("off-grid coordinates snap with a warning") {
    const auto s = export_policy_slice(*policy.model, *policy.q, 31.0, 7.2, 90.0);
    CHECK(s.ego_speed_kmh == doctest::Approx(30.0));
    CHECK(s.warnings.size() == 1u);
  }
  SUBCASE("mirroring the pedestrian mirrors the slice") {
    for (double heading : {90.0, 0.0}) {
      const auto a = export_policy_slice(*policy.model, *policy.q, 40.0, 7.2, heading);
      const auto b = export_policy_slice(*policy.model, *policy.q, 40.0, 7.2, -heading);
      const std::size_t nt = a.t_values.size();
      for (std::size_t t = 0; t < nt; ++t) CHECK(a.action[t] == b.action[nt - 1 - t]);
    }
  }
  SUBCASE("csv layout") {
    const auto s = export_policy_slice(*policy.model, *policy.q, 40.0, 7.2, 90.0);
    std::ostringstream out;
    write_slice_csv(s, out);
    std::istringstream in(out.str());
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);
    CHECK(line.rfind("t\\s,0", 0) == 0);
    while (std::getline(in, line)) ++rows;
    CHECK(rows == s.t_values.size());
  }
  CHECK_THROWS_AS(export_policy_slice(*policy.model, pomdp::QValueTable{}, 40.0, 7.2, 90.0), DimensionError);
}
