#include "pomdp/discrete_pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "common/errors.hpp"

namespace pedplan::pomdp {

namespace {

constexpr double kRowSumTolerance = 1e-9;
constexpr double kDegenerateMass = 1e-12;

void check_row(const SparseDistribution& row, std::size_t state, std::size_t action,
               std::size_t state_count) {
  double sum = 0.0;
  for (const auto& [next, p] : row) {
    if (next >= state_count) {
      throw ModelValidationError("transition (" + std::to_string(state) + ", " +
                                 std::to_string(action) + ") points outside the state space");
    }
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ModelValidationError("negative or non-finite transition probability at state " +
                                 std::to_string(state) + ", action " + std::to_string(action));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    throw ModelValidationError("transition row (" + std::to_string(state) + ", " +
                               std::to_string(action) + ") sums to " + std::to_string(sum));
  }
}

void check_shape(const DiscretePomdp& model) {
  if (model.state_count == 0 || model.action_count == 0) {
    throw ModelValidationError("model needs at least one state and one action");
  }
  if (!(model.discount >= 0.0 && model.discount < 1.0)) {
    throw ModelValidationError("discount must lie in [0, 1)");
  }
  if (!model.transition || !model.reward) {
    throw ModelValidationError("model is missing its transition or reward evaluator");
  }
}

}  // namespace

Belief Belief::uniform(std::size_t state_count) {
  return Belief{std::vector<double>(state_count, 1.0 / static_cast<double>(state_count))};
}

Belief Belief::delta(std::size_t state_count, std::size_t state) {
  Belief b{std::vector<double>(state_count, 0.0)};
  b.mass.at(state) = 1.0;
  return b;
}

double Belief::total() const {
  double sum = 0.0;
  for (double m : mass) sum += m;
  return sum;
}

bool Belief::is_normalized(double tolerance) const {
  double sum = 0.0;
  for (double m : mass) {
    if (m < 0.0 || !std::isfinite(m)) return false;
    sum += m;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

std::size_t QValueTable::greedy_action(std::size_t state) const {
  std::size_t best = 0;
  for (std::size_t a = 1; a < action_count; ++a) {
    if ((*this)(state, a) > (*this)(state, best)) best = a;
  }
  return best;
}

void validate_model(const DiscretePomdp& model) {
  check_shape(model);
  SparseDistribution row;
  for (std::size_t s = 0; s < model.state_count; ++s) {
    for (std::size_t a = 0; a < model.action_count; ++a) {
      row.clear();
      model.transition(s, a, row);
      check_row(row, s, a, model.state_count);
      if (!std::isfinite(model.reward(s, a))) {
        throw ModelValidationError("non-finite reward at state " + std::to_string(s));
      }
    }
  }
}

QValueTable value_iterate(const DiscretePomdp& model, const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) throw UsageError("value_iterate: tolerance must be positive");
  if (options.max_iterations < 1) throw UsageError("value_iterate: max_iterations must be >= 1");
  check_shape(model);

  const std::size_t n = model.state_count;
  const std::size_t m = model.action_count;

  // Materialise the rows once (validating them); the Bellman sweeps then run
  // over a compressed sparse layout.
  std::vector<std::size_t> offsets;
  offsets.reserve(n * m + 1);
  offsets.push_back(0);
  std::vector<Successor> entries;
  std::vector<double> rewards(n * m);
  SparseDistribution row;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < m; ++a) {
      row.clear();
      model.transition(s, a, row);
      check_row(row, s, a, n);
      const double r = model.reward(s, a);
      if (!std::isfinite(r)) {
        throw ModelValidationError("non-finite reward at state " + std::to_string(s) + ", action " +
                                   std::to_string(a));
      }
      rewards[s * m + a] = r;
      entries.insert(entries.end(), row.begin(), row.end());
      offsets.push_back(entries.size());
    }
  }

  QValueTable q;
  q.state_count = n;
  q.action_count = m;
  q.values.assign(n * m, 0.0);
  q.tolerance = options.tolerance;
  q.residual = std::numeric_limits<double>::infinity();

  std::vector<double> value(n, 0.0);
  std::vector<double> next(n * m);
  const double gamma = model.discount;
  while (q.iterations < options.max_iterations) {
    for (std::size_t s = 0; s < n; ++s) {
      const double* qs = &q.values[s * m];
      value[s] = *std::max_element(qs, qs + m);
    }
    double residual = 0.0;
    for (std::size_t i = 0; i < n * m; ++i) {
      double expected = 0.0;
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
        expected += entries[k].probability * value[entries[k].state];
      }
      next[i] = rewards[i] + gamma * expected;
      residual = std::max(residual, std::abs(next[i] - q.values[i]));
    }
    q.values.swap(next);
    ++q.iterations;
    q.residual = residual;
    if (options.on_sweep) options.on_sweep(q.iterations, residual);
    if (residual <= options.tolerance) break;
  }
  return q;
}

double qmdp_utility(const Belief& belief, const QValueTable& q, std::size_t action) {
  if (belief.size() != q.state_count) {
    throw DimensionError("belief has " + std::to_string(belief.size()) + " entries, Q table has " +
                         std::to_string(q.state_count) + " states");
  }
  if (action >= q.action_count) throw DimensionError("action index out of range");
  double u = 0.0;
  for (std::size_t s = 0; s < belief.mass.size(); ++s) {
    if (belief.mass[s] != 0.0) u += belief.mass[s] * q(s, action);
  }
  return u;
}

Belief predict(const Belief& belief, std::size_t action, const DiscretePomdp& model) {
  if (belief.size() != model.state_count) throw DimensionError("belief/model size mismatch");
  if (action >= model.action_count) throw DimensionError("action index out of range");
  Belief out{std::vector<double>(model.state_count, 0.0)};
  SparseDistribution row;
  for (std::size_t s = 0; s < belief.mass.size(); ++s) {
    const double b = belief.mass[s];
    if (b == 0.0) continue;
    row.clear();
    model.transition(s, action, row);
    for (const auto& [next, p] : row) out.mass[next] += p * b;
  }
  return out;
}

Belief belief_update(const Belief& belief, std::size_t action, ObservationView observation,
                     const DiscretePomdp& model) {
  if (!model.observation_likelihood) {
    throw ModelValidationError("model has no observation likelihood");
  }
  Belief out = predict(belief, action, model);
  double total = 0.0;
  for (std::size_t s = 0; s < out.mass.size(); ++s) {
    if (out.mass[s] == 0.0) continue;
    out.mass[s] *= model.observation_likelihood(observation, s);
    total += out.mass[s];
  }
  if (!(total >= kDegenerateMass) || !std::isfinite(total)) {
    throw DegenerateBeliefError("observation is incompatible with every predicted state");
  }
  for (double& m : out.mass) m /= total;
  return out;
}

ActionChoice decomposed_action(std::span<const Belief> beliefs, const QValueTable& q) {
  if (beliefs.empty()) throw UsageError("decomposed_action needs at least one belief");
  ActionChoice best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t a = 0; a < q.action_count; ++a) {
    double worst = std::numeric_limits<double>::infinity();
    for (const Belief& b : beliefs) worst = std::min(worst, qmdp_utility(b, q, a));
    if (worst > best.utility) best = {a, worst};
  }
  return best;
}

}  // namespace pedplan::pomdp
