#pragma once

// Generic finite-space POMDP machinery: QMDP value iteration, discrete
// Bayesian belief filtering and min-decomposition over independent agents.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pedplan::pomdp {

struct Successor {
  std::size_t state;
  double probability;
};

using SparseDistribution = std::vector<Successor>;

/// Continuous observation vector. An empty view means "nothing detected".
using ObservationView = std::span<const double>;

/// A finite POMDP tuple. Transition rows are produced on demand so that very
/// large models never need to be materialised.
struct DiscretePomdp {
  std::size_t state_count = 0;
  std::size_t action_count = 0;
  /// Writes T(.|state, action) into `out` (cleared by the callee).
  std::function<void(std::size_t state, std::size_t action, SparseDistribution& out)> transition;
  std::function<double(std::size_t state, std::size_t action)> reward;
  std::function<double(ObservationView observation, std::size_t next_state)> observation_likelihood;
  double discount = 0.95;
};

struct Belief {
  std::vector<double> mass;

  static Belief uniform(std::size_t state_count);
  static Belief delta(std::size_t state_count, std::size_t state);

  std::size_t size() const { return mass.size(); }
  double total() const;
  /// True when all entries are non-negative and they sum to one within `tolerance`.
  bool is_normalized(double tolerance = 1e-9) const;
};

struct QValueTable {
  std::size_t state_count = 0;
  std::size_t action_count = 0;
  std::vector<double> values;  // row-major (state, action)
  double residual = 0.0;
  std::size_t iterations = 0;
  double tolerance = 0.0;

  double operator()(std::size_t state, std::size_t action) const {
    return values[state * action_count + action];
  }
  double& at(std::size_t state, std::size_t action) { return values[state * action_count + action]; }
  bool converged() const { return residual <= tolerance; }
  std::size_t greedy_action(std::size_t state) const;
};

struct SolverOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 10000;
  /// Called after every sweep with (iteration, max-norm Bellman residual).
  std::function<void(std::size_t, double)> on_sweep;
};

/// Checks every transition row and reward of `model`; throws ModelValidationError.
void validate_model(const DiscretePomdp& model);

/// Synchronous (Jacobi) value iteration for the fully observable MDP
/// underlying `model`, starting from Q = 0. Stops when the max-norm change of
/// Q falls to `tolerance` or after `max_iterations` sweeps.
QValueTable value_iterate(const DiscretePomdp& model, const SolverOptions& options = {});

/// Belief-weighted utility sum_s b(s) Q(s, a).
double qmdp_utility(const Belief& belief, const QValueTable& q, std::size_t action);

/// b'(s') proportional to O(o | s') sum_s T(s' | s, a) b(s).
Belief belief_update(const Belief& belief, std::size_t action, ObservationView observation,
                     const DiscretePomdp& model);

/// Prediction step only: sum_s T(s' | s, a) b(s).
Belief predict(const Belief& belief, std::size_t action, const DiscretePomdp& model);

struct ActionChoice {
  std::size_t action = 0;
  double utility = 0.0;
};

/// argmax_a min_i qmdp_utility(b_i, q, a). Ties go to the lowest action index.
ActionChoice decomposed_action(std::span<const Belief> beliefs, const QValueTable& q);

}  // namespace pedplan::pomdp
