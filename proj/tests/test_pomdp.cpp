#include <doctest.h>

#include <cmath>
#include <random>

#include "common/errors.hpp"
#include "oracles.hpp"
#include "pomdp/discrete_pomdp.hpp"

using namespace pedplan;
using namespace pedplan::pomdp;

namespace {

// 3-state chain: 0 -> 1 -> 2 (absorbing), action 1 stays put.
oracle::DenseMdp chain_mdp(double gamma) {
  oracle::DenseMdp d;
  d.n = 3;
  d.m = 2;
  d.gamma = gamma;
  d.T = {0.2, 0.8, 0.0, /**/ 1.0, 0.0, 0.0,
         0.0, 0.3, 0.7, /**/ 0.0, 1.0, 0.0,
         0.0, 0.0, 1.0, /**/ 0.0, 0.0, 1.0};
  d.R = {-1.0, 0.5, -2.0, 0.0, 10.0, 1.0};
  return d;
}

SolverOptions tight() {
  SolverOptions o;
  o.tolerance = 1e-13;
  o.max_iterations = 100000;
  return o;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("single state zero reward has a zero fixed point") {
  oracle::DenseMdp d;
  d.n = 1;
  d.m = 1;
  d.gamma = 0.9;
  d.T = {1.0};
  d.R = {0.0};
  const auto q = value_iterate(oracle::to_pomdp(d));
  CHECK(q(0, 0) == 0.0);
  CHECK(q.residual == 0.0);
  CHECK(q.converged());
}

TEST_CASE("zero discount returns the immediate reward") {
  auto d = chain_mdp(0.0);
  const auto q = value_iterate(oracle::to_pomdp(d));
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 2; ++a) CHECK(q(s, a) == d.r(s, a));
}

TEST_CASE("chain MDP matches brute-force Bellman iteration") {
  auto d = chain_mdp(0.5);
  const auto q = value_iterate(oracle::to_pomdp(d), tight());
  CHECK(max_diff(q.values, oracle::bellman_q(d)) < 1e-9);
}

TEST_CASE("random MDPs match brute-force Bellman iteration") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto d = oracle::random_mdp(rng, 5 + trial * 3, 1 + trial % 4, 0.9);
    const auto q = value_iterate(oracle::to_pomdp(d), tight());
    CHECK(max_diff(q.values, oracle::bellman_q(d)) < 1e-9);
  }
}

TEST_CASE("iteration cap leaves a non-converged table") {
  auto d = chain_mdp(0.9);
  SolverOptions o;
  o.max_iterations = 2;
  const auto q = value_iterate(oracle::to_pomdp(d), o);
  CHECK(q.iterations == 2);
  CHECK_FALSE(q.converged());
}

TEST_CASE("on_sweep reports a decreasing residual for a contraction") {
  auto d = chain_mdp(0.5);
  SolverOptions o = tight();
  std::vector<double> residuals;
  o.on_sweep = [&](std::size_t, double r) { residuals.push_back(r); };
  const auto q = value_iterate(oracle::to_pomdp(d), o);
  REQUIRE(residuals.size() == q.iterations);
  for (std::size_t i = 2; i < residuals.size(); ++i) CHECK(residuals[i] <= residuals[i - 1] + 1e-15);
}

TEST_CASE("model validation rejects broken tuples") {
  auto d = chain_mdp(0.5);
  auto good = oracle::to_pomdp(d);
  CHECK_NOTHROW(validate_model(good));

  auto bad_row = good;
  bad_row.transition = [](std::size_t, std::size_t, SparseDistribution& out) { out = {{0, 0.5}}; };
  CHECK_THROWS_AS(validate_model(bad_row), ModelValidationError);

  auto bad_index = good;
  bad_index.transition = [](std::size_t, std::size_t, SparseDistribution& out) { out = {{7, 1.0}}; };
  CHECK_THROWS_AS(validate_model(bad_index), ModelValidationError);

  auto bad_gamma = good;
  bad_gamma.discount = 1.0;
  CHECK_THROWS_AS(validate_model(bad_gamma), ModelValidationError);

  auto bad_reward = good;
  bad_reward.reward = [](std::size_t, std::size_t) { return NAN; };
  CHECK_THROWS_AS(value_iterate(bad_reward), ModelValidationError);
}

TEST_CASE("qmdp utility") {
  auto d = chain_mdp(0.5);
  const auto q = value_iterate(oracle::to_pomdp(d), tight());
  for (std::size_t s = 0; s < 3; ++s) CHECK(qmdp_utility(Belief::delta(3, s), q, 1) == doctest::Approx(q(s, 1)));

  Belief two{{0.5, 0.5, 0.0}};
  CHECK(qmdp_utility(two, q, 0) == doctest::Approx((q(0, 0) + q(1, 0)) / 2));

  Belief b{{0.3, 0.7, 0.0}};
  const double direct = 0.3 * q.values[0 * 2 + 1] + 0.7 * q.values[1 * 2 + 1];
  CHECK(std::abs(qmdp_utility(b, q, 1) - direct) < 1e-12);

  CHECK_THROWS_AS(qmdp_utility(Belief::uniform(4), q, 0), DimensionError);
  CHECK_THROWS_AS(qmdp_utility(b, q, 5), DimensionError);
}

TEST_CASE("belief update with a constant likelihood is the prediction") {
  auto d = chain_mdp(0.5);
  auto model = oracle::to_pomdp(d);
  Belief b{{0.2, 0.5, 0.3}};
  const std::vector<double> obs{0.0};
  const auto post = belief_update(b, 0, obs, model);
  const auto pred = predict(b, 0, model);
  CHECK(post.is_normalized());
  for (std::size_t s = 0; s < 3; ++s) CHECK(post.mass[s] == doctest::Approx(pred.mass[s]));
}

TEST_CASE("perfect observation collapses the belief") {
  auto d = chain_mdp(0.5);
  auto model = oracle::to_pomdp(d);
  model.observation_likelihood = [](ObservationView o, std::size_t s) { return s == 2 && o.size() == 1 ? 1.0 : 0.0; };
  const auto post = belief_update(Belief{{0.0, 1.0, 0.0}}, 0, std::vector<double>{1.0}, model);
  CHECK(post.mass[2] == doctest::Approx(1.0));
  // State 2 is unreachable from state 0 under action 1.
  CHECK_THROWS_AS(belief_update(Belief::delta(3, 0), 1, std::vector<double>{1.0}, model), DegenerateBeliefError);
}

TEST_CASE("Gaussian likelihood between two cells matches enumeration") {
  auto d = chain_mdp(0.5);
  auto model = oracle::to_pomdp(d);
  const std::vector<double> centers{0.0, 1.0, 2.0};
  auto lik = [&](double o, std::size_t s) { return std::exp(-0.5 * std::pow((o - centers[s]) / 0.4, 2)); };
  model.observation_likelihood = [&](ObservationView o, std::size_t s) { return lik(o[0], s); };
  Belief b{{0.6, 0.3, 0.1}};
  const std::vector<double> obs{1.5};
  const auto post = belief_update(b, 0, obs, model);
  std::vector<double> l(3);
  for (std::size_t s = 0; s < 3; ++s) l[s] = lik(1.5, s);
  const auto expect = oracle::enumerate_update(d, l, b.mass, 0);
  CHECK(max_diff(post.mass, expect) < 1e-12);
}

TEST_CASE("decomposed action") {
  QValueTable q;
  q.state_count = 4;
  q.action_count = 3;
  // states: 0 near crossing, 1 far, 2/3 spare
  q.values = {-100, -50, -10,  //
              0, -1, -2,       //
              -3, -3, -3,      //
              5, 5, 5};
  const Belief critical = Belief::delta(4, 0);
  const Belief far = Belief::delta(4, 1);

  SUBCASE("single belief equals plain argmax") {
    CHECK(decomposed_action(std::vector<Belief>{far}, q).action == 0);
    CHECK(decomposed_action(std::vector<Belief>{critical}, q).action == 2);
  }
  SUBCASE("duplicated belief is idempotent") {
    CHECK(decomposed_action(std::vector<Belief>{far, far}, q).action == 0);
  }
  SUBCASE("critical pedestrian dominates") {
    const std::vector<Belief> both{far, critical};
    const auto choice = decomposed_action(both, q);
    CHECK(choice.action == decomposed_action(std::vector<Belief>{critical}, q).action);
    CHECK(choice.action == oracle::argmax_min({far.mass, critical.mass}, q));
    CHECK(choice.utility == doctest::Approx(-10.0));
  }
  SUBCASE("ties go to the lowest index") {
    CHECK(decomposed_action(std::vector<Belief>{Belief::delta(4, 2)}, q).action == 0);
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(decomposed_action(std::vector<Belief>{}, q), UsageError);
  }
}
