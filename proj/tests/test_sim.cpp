#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "common/errors.hpp"
#include "sim/episode_log.hpp"
#include "sim/pomdp_planner.hpp"
#include "sim/scenario.hpp"
#include "sim/simulator.hpp"

using namespace pedplan;
using namespace pedplan::sim;

namespace {

const ScenarioGeometry kGeometry{};

ped::ModelConfig coarse_model() {
  ped::ModelConfig c;
  auto& d = c.discretization;
  d.ego_speed = {0.0, 50.0 * ped::kKmh, 11};
  d.ego_lateral = {-1.0, 1.0, 3};
  d.ped_s = {0.0, 50.0, 11};
  d.ped_t = {-5.0, 5.0, 5};
  d.ped_speed = {0.0, 2.0, 2};
  d.ped_heading = {-90.0 * ped::kDeg, 90.0 * ped::kDeg, 3};
  c.footprint = {5.1, 2.4};
  c.motion.accelerations = {0.0, 1.0, -1.0, 2.0, -2.0};
  c.reward.velocity_weight = 0.1;
  c.reward.longitudinal_action_penalty = -1.0;
  c.appearance.p_appear = 0.1;
  return c;
}

const Policy& coarse_policy() {
  static const Policy policy = [] {
    auto model = std::make_shared<const ped::PedestrianPomdp>(coarse_model());
    return Policy{model, std::make_shared<const pomdp::QValueTable>(model->solve())};
  }();
  return policy;
}

}  // namespace

TEST_CASE("scenario names and parsing") {
  for (ScenarioKind k : all_scenario_kinds()) CHECK(parse_scenario_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_scenario_kind("CPBN"), ConfigError);
  CHECK(ScenarioSpec::make(ScenarioKind::kCpan25, 0.25, kGeometry).name() == "CPAN-25_250");
  CHECK(ScenarioSpec::make(ScenarioKind::kFpNear, 0.0, kGeometry).name() == "FP-near");
  CHECK(parse_variant("pomdp_aeb") == Variant::kPomdpAeb);
  CHECK_THROWS_AS(parse_variant("mpc"), ConfigError);
}

TEST_CASE("scenario validation") {
  auto spec = ScenarioSpec::make(ScenarioKind::kCpan25, 0.0, kGeometry);
  spec.impact_fraction = 0.6;
  CHECK_THROWS_AS(build_scenario(spec, kGeometry), ConfigError);
  auto cpaf = ScenarioSpec::make(ScenarioKind::kCpaf, 0.0, kGeometry);
  cpaf.occlusion = OcclusionGeometry{{{-10.0, -4.0, -4.25, -2.25}}};
  CHECK_THROWS_AS(build_scenario(cpaf, kGeometry), ConfigError);
  auto cpcn = ScenarioSpec::make(ScenarioKind::kCpcn, 0.0, kGeometry);
  cpcn.occlusion.reset();
  CHECK_THROWS_AS(build_scenario(cpcn, kGeometry), ConfigError);
}

TEST_CASE("closed-form crossing timing") {
  SUBCASE("nominal nearside case starts immediately") {
    const auto w = build_scenario(ScenarioSpec::make(ScenarioKind::kCpan25, 0.0, kGeometry), kGeometry);
    CHECK(std::abs(w.ego_arrival_time - 3.6) < 1e-6);
    REQUIRE(w.pedestrians.size() == 1);
    CHECK(std::abs(w.pedestrians[0].start_time - 0.0) < 1e-6);
  }
  SUBCASE("slower ego delays the pedestrian") {
    const auto w = build_scenario(ScenarioSpec::make(ScenarioKind::kCpan25, 0.0, kGeometry, 30.0), kGeometry);
    CHECK(std::abs(w.ego_arrival_time - 6.0) < 1e-6);
    CHECK(std::abs(w.pedestrians[0].start_time - 2.4) < 1e-6);
  }
  SUBCASE("farside adult at 8 km/h") {
    const auto w = build_scenario(ScenarioSpec::make(ScenarioKind::kCpaf, 0.0, kGeometry), kGeometry);
    CHECK(std::abs(w.pedestrians[0].start_time - (3.6 - 5.0 / (8.0 / 3.6))) < 1e-6);
    CHECK(w.pedestrians[0].direction == -1.0);
  }
  SUBCASE("pedestrian reaches the impact point when the ego front does") {
    for (ScenarioKind k : {ScenarioKind::kCpaf, ScenarioKind::kCpan25, ScenarioKind::kCpan75, ScenarioKind::kCpcn}) {
      for (double f : {0.0, 0.25, 0.5}) {
        const auto w = build_scenario(ScenarioSpec::make(k, f, kGeometry), kGeometry);
        const Vec2 p = w.pedestrians[0].position(w.ego_arrival_time);
        CHECK(std::abs(p.s - w.impact_point.s) < 1e-9);
        CHECK(std::abs(p.t - w.impact_point.t) < 1e-9);
        const double front = w.ego_s + 0.5 * kGeometry.vehicle_length + w.ego_speed * w.ego_arrival_time;
        CHECK(std::abs(front - w.conflict_s) < 1e-9);
      }
    }
  }
  SUBCASE("impact fraction moves the conflict point by half the width") {
    const auto a = build_scenario(ScenarioSpec::make(ScenarioKind::kCpan25, 0.0, kGeometry), kGeometry);
    const auto b = build_scenario(ScenarioSpec::make(ScenarioKind::kCpan25, 0.5, kGeometry), kGeometry);
    CHECK(std::abs(std::abs(b.impact_point.t - a.impact_point.t) - 0.9) < 1e-12);
    CHECK(b.impact_point.t == doctest::Approx(0.0));
  }
}

TEST_CASE("special scenarios") {
  const auto empty = build_scenario(ScenarioSpec::make(ScenarioKind::kCpcnEmpty, 0.0, kGeometry), kGeometry);
  CHECK(empty.pedestrians.empty());
  CHECK(empty.obstacles.obstacles.size() == 1);

  const auto cpcn = build_scenario(ScenarioSpec::make(ScenarioKind::kCpcn, 0.0, kGeometry), kGeometry);
  const Rect& car = cpcn.obstacles.obstacles.at(0);
  CHECK(car.s_max == doctest::Approx(cpcn.conflict_s - 2.0));
  CHECK(car.s_max - car.s_min == doctest::Approx(6.0));
  CHECK(car.t_max == doctest::Approx(-1.75 - 0.5));

  const auto near = build_scenario(ScenarioSpec::make(ScenarioKind::kFpNear, 0.0, kGeometry), kGeometry);
  const auto short_ = build_scenario(ScenarioSpec::make(ScenarioKind::kFpStopShort, 0.0, kGeometry), kGeometry);
  CHECK(near.pedestrians[0].position(100.0).t == doctest::Approx(0.9 + 0.9));
  CHECK(short_.pedestrians[0].position(100.0).t == doctest::Approx(-0.9 - 0.9));
  CHECK(near.pedestrians[0].speed_at(100.0) == 0.0);
  CHECK(near.pedestrians[0].position(near.ego_arrival_time - 2.0).t == doctest::Approx(1.8));
}

TEST_CASE("collision detection") {
  const Vec2 ego{0.0, 0.0};
  std::vector<Vec2> far{{7.25, 0.0}};
  CHECK_FALSE(detect_collision(ego, 10.0 / 3.6, 4.5, 1.8, far, 0.3));
  std::vector<Vec2> bumper{{2.25, 0.0}};
  const auto hit = detect_collision(ego, 10.0 / 3.6, 4.5, 1.8, bumper, 0.3);
  REQUIRE(hit);
  CHECK(hit->speed_kmh == doctest::Approx(10.0));
  std::vector<Vec2> tangent{{0.0, 0.9 + 0.3}};
  CHECK(detect_collision(ego, 1.0, 4.5, 1.8, tangent, 0.3));
}

TEST_CASE("AEB-only episodes") {
  EpisodeConfig cfg;
  SUBCASE("empty road keeps the desired speed") {
    const auto log = run_episode(ScenarioSpec::make(ScenarioKind::kCpcnEmpty, 0.0, kGeometry), Variant::kAebOnly, cfg);
    CHECK(log.summary.end_reason == "exit");
    CHECK(log.summary.emergency_brakes == 0);
    for (const auto& r : log.ticks) CHECK(r.ego_v == doctest::Approx(50.0 / 3.6));
  }
  SUBCASE("false positives do not trigger") {
    for (ScenarioKind k : {ScenarioKind::kFpNear, ScenarioKind::kFpStopShort}) {
      const auto log = run_episode(ScenarioSpec::make(k, 0.0, kGeometry), Variant::kAebOnly, cfg);
      CHECK(log.summary.emergency_brakes == 0);
      CHECK_FALSE(log.summary.collided);
    }
  }
  SUBCASE("crossing pedestrian triggers a full brake") {
    const auto log = run_episode(ScenarioSpec::make(ScenarioKind::kCpan25, 0.25, kGeometry), Variant::kAebOnly, cfg);
    CHECK(log.summary.emergency_brakes == 1);
    double min_a = 0.0;
    for (const auto& r : log.ticks) min_a = std::min(min_a, r.a_applied);
    CHECK(min_a == doctest::Approx(cfg.aeb.a_max));
  }
  SUBCASE("commands take effect after the actuation delay") {
    const auto log = run_episode(ScenarioSpec::make(ScenarioKind::kCpan25, 0.25, kGeometry), Variant::kAebOnly, cfg);
    std::size_t first_brake = 0, first_applied = 0;
    for (std::size_t i = 0; i < log.ticks.size(); ++i) {
      if (!first_brake && log.ticks[i].brake) first_brake = i;
      if (!first_applied && log.ticks[i].a_applied < 0.0) first_applied = i;
    }
    REQUIRE(first_brake > 0);
    CHECK(first_applied - first_brake == 4u);
  }
  SUBCASE("planner variants need a policy") {
    CHECK_THROWS_AS(run_episode(ScenarioSpec::make(ScenarioKind::kCpan25, 0.0, kGeometry), Variant::kPomdp, cfg),
                    UsageError);
  }
}

TEST_CASE("POMDP planner") {
  SUBCASE("rejects unusable policies") {
    CHECK_THROWS_AS(PomdpPlanner(Policy{}), UsageError);
    auto model = std::make_shared<const ped::PedestrianPomdp>(coarse_model());
    pomdp::QValueTable q;
    q.state_count = model->state_count();
    q.action_count = model->action_count();
    q.values.assign(q.state_count * q.action_count, 0.0);
    q.residual = 1.0;
    q.tolerance = 1e-6;
    CHECK_THROWS_AS(PomdpPlanner(Policy{model, std::make_shared<const pomdp::QValueTable>(q)}), NotConvergedError);
    q.residual = 0.0;
    q.state_count -= 1;
    CHECK_THROWS_AS(PomdpPlanner(Policy{model, std::make_shared<const pomdp::QValueTable>(q)}), DimensionError);
  }
  SUBCASE("empty road: cruise at the desired speed") {
    EpisodeConfig cfg;
    auto spec = ScenarioSpec::make(ScenarioKind::kCpcnEmpty, 0.0, kGeometry);
    // Far behind the start, never between the sensor and the road ahead.
    spec.occlusion = OcclusionGeometry{{{-500.0, -490.0, -30.0, -28.0}}};
    const auto log = run_episode(spec, Variant::kPomdp, cfg, &coarse_policy());
    CHECK(log.summary.end_reason == "exit");
    for (const auto& r : log.ticks) {
      CHECK(r.a_applied >= 0.0);
      CHECK(r.hidden_mass == 0.0);
    }
    CHECK(log.ticks.back().ego_v == doctest::Approx(50.0 / 3.6));
  }
  SUBCASE("occlusion raises the hidden mass") {
    PomdpPlanner planner(coarse_policy());
    const auto world = build_scenario(ScenarioSpec::make(ScenarioKind::kCpcnEmpty, 0.0, kGeometry), kGeometry);
    planner.reset(0.0, 0.0, world.obstacles);
    const auto d = planner.step(0.0, 0.0, 50.0 / 3.6, {}, world.obstacles);
    CHECK(d.hidden_mass > 0.0);
    CHECK(planner.hidden_belief().is_normalized());
  }
  SUBCASE("a pedestrian standing in the lane ahead makes the ego brake") {
    PomdpPlanner planner(coarse_policy());
    planner.reset(0.0, 0.0, OcclusionGeometry{});
    const std::vector<Measurement> m{{0, 40.0, 0.0, 0.0, 0.0}};
    const auto d = planner.step(0.0, 0.0, 50.0 / 3.6, m, OcclusionGeometry{});
    CHECK(d.longitudinal < 0.0);
    CHECK(planner.track_count() == 1u);
  }
}

TEST_CASE("episode logs") {
  EpisodeConfig cfg;
  const auto spec = ScenarioSpec::make(ScenarioKind::kCpcn, 0.25, kGeometry);
  const auto a = run_episode(spec, Variant::kPomdpAeb, cfg, &coarse_policy());
  const auto b = run_episode(spec, Variant::kPomdpAeb, cfg, &coarse_policy());
  CHECK(to_csv(a) == to_csv(b));

  auto other = cfg;
  other.sensor.rng_seed = 99;
  CHECK(to_csv(run_episode(spec, Variant::kPomdpAeb, other, &coarse_policy())) != to_csv(a));

  const auto header = csv_header(1);
  CHECK(header.front() == "time");
  CHECK(header.size() == 6u + 6u + 4u);
  std::istringstream in(to_csv(a));
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  CHECK(first.rfind("time,ego_s", 0) == 0);
  // The child is behind the parked car at the start: no measurement yet.
  CHECK(second.find("nan") != std::string::npos);
  for (std::size_t i = 1; i < a.ticks.size(); ++i) CHECK(a.ticks[i].time > a.ticks[i - 1].time);
}
