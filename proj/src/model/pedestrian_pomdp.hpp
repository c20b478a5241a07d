#pragma once

// Occlusion-aware pedestrian avoidance POMDP in the ego-relative Frenet frame.
//
// Joint state = (ego speed, ego lateral offset) x (pedestrian cell | absent).
// A pedestrian cell is (s, t, speed, heading); s is measured from the ego
// centre, t from the lane centre (positive to the left), heading from the +s
// axis. Joint actions are the cartesian product of longitudinal and lateral
// accelerations, longitudinal-major, with the zero action first.

#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "model/geometry.hpp"
#include "model/grid.hpp"
#include "pomdp/discrete_pomdp.hpp"

namespace pedplan::ped {

constexpr double kKmh = 1.0 / 3.6;  // km/h -> m/s
constexpr double kDeg = std::numbers::pi / 180.0;

struct DiscretizationSpec {
  Axis ego_speed{0.0, 50.0 * kKmh, 29};
  Axis ego_lateral{-1.0, 1.0, 5};
  Axis ped_s{0.0, 50.0, 27};
  Axis ped_t{-5.0, 5.0, 11};
  Axis ped_speed{0.0, 2.0, 5};
  Axis ped_heading{-90.0 * kDeg, 90.0 * kDeg, 7};

  void validate() const;
  std::size_t ego_count() const;
  std::size_t ped_cell_count() const;
};

struct Action {
  double longitudinal = 0.0;  // m/s^2
  double lateral = 0.0;       // m/s^2
};

struct ActionSpec {
  std::vector<double> longitudinal{0.0, 1.0, -1.0, -2.0, -4.0};
  std::vector<double> lateral{0.0, 1.0, -1.0};

  std::vector<Action> joint() const;
};

struct RewardParams {
  double collision_penalty = -1000.0;
  double velocity_weight = 1.0;     // per km/h below the desired speed
  double lane_center_weight = 10.0;  // per m of lateral offset
  double longitudinal_action_penalty = -5.0;
  double lateral_action_penalty = -5.0;
  double desired_speed_kmh = 50.0;

  void validate() const;
};

struct AppearanceModel {
  double p_appear = 0.01;
};

/// Reachability model: every per-axis acceleration pair is equally likely.
struct PedestrianMotion {
  std::vector<double> accelerations{0.0, 0.5, -0.5, 1.0, -1.0};
  double max_speed = 2.0;
};

struct Footprint {
  double length = 4.5;
  double width = 1.8;
};

struct SensorNoise {
  double position_std = 0.1;
  double speed_std = 0.2;
  double heading_std = 10.0 * kDeg;
};

struct ModelConfig {
  DiscretizationSpec discretization;
  ActionSpec actions;
  RewardParams reward;
  AppearanceModel appearance;
  OcclusionGeometry occlusion;
  PedestrianMotion motion;
  Footprint footprint;
  SensorNoise noise;
  double planner_dt = 0.2;
  double discount = 0.95;
};

struct EgoStep {
  double speed;
  double lateral;
  double advance;
};

/// Point-mass longitudinal motion with quasi-static lateral displacement.
EgoStep ego_transition(double speed, double lateral, Action action, double dt, double max_speed,
                       double lateral_limit = 1.0);

struct PedPoint {
  double s = 0.0;
  double t = 0.0;
  double speed = 0.0;
  double heading = 0.0;
};

/// Pedestrian centre inside the ego footprint (ego centre at s = 0).
bool in_collision(double ped_s, double ped_t, double ego_lateral, const Footprint& footprint);

double reward(double ego_speed, double ego_lateral, bool collision, Action action,
              const RewardParams& params);

/// Per-axis standard deviations used by the observation model.
struct LikelihoodWidths {
  double s = 0.1;
  double t = 0.1;
  double speed = 0.2;
  double heading = 10.0 * kDeg;
};

/// Sensor noise widened by the interpolation kernel of each grid axis,
/// sqrt(sigma^2 + h^2 / 6) for spacing h. A grid node stands for a hat-shaped
/// spread of true states, so a measurement between nodes stays plausible.
LikelihoodWidths grid_likelihood_widths(const SensorNoise& noise, const DiscretizationSpec& discretization);

/// Likelihood of `observation` (empty = no detection, else s, t, speed,
/// heading) given the pedestrian state (`cell` empty = absent) and whether the
/// state is visible to the sensor.
double observation_likelihood(pomdp::ObservationView observation, const std::optional<PedPoint>& cell,
                              bool visible, const LikelihoodWidths& widths);
double observation_likelihood(pomdp::ObservationView observation, const std::optional<PedPoint>& cell,
                              bool visible, const SensorNoise& noise);

class PedestrianPomdp {
 public:
  static constexpr std::size_t kObservationSize = 4;

  explicit PedestrianPomdp(ModelConfig config);

  const ModelConfig& config() const;
  const std::vector<Action>& actions() const;
  /// Widths used by the observation evaluators of this model.
  const LikelihoodWidths& likelihood_widths() const;

  std::size_t ego_count() const;
  std::size_t ped_cell_count() const;
  std::size_t ped_state_count() const { return ped_cell_count() + 1; }
  std::size_t absent_index() const { return ped_cell_count(); }
  std::size_t state_count() const { return ego_count() * ped_state_count(); }
  std::size_t action_count() const { return actions().size(); }

  std::size_t ego_index(int speed_level, int lateral_level) const;
  std::size_t ped_index(int s_level, int t_level, int speed_level, int heading_level) const;
  std::size_t joint_index(std::size_t ego, std::size_t ped) const { return ego * ped_state_count() + ped; }
  double ego_speed(std::size_t ego) const;
  double ego_lateral(std::size_t ego) const;
  PedPoint cell_center(std::size_t ped) const;

  /// Pedestrian own motion over one planner step, including the build-time
  /// appearance model for the absent state.
  pomdp::SparseDistribution pedestrian_transition(std::size_t ped) const;
  /// Relative displacement caused by the ego advancing `advance` metres.
  void shift(std::size_t ped, double advance, pomdp::SparseDistribution& out) const;

  void transition(std::size_t state, std::size_t action, pomdp::SparseDistribution& out) const;
  double reward(std::size_t state, std::size_t action) const;
  bool is_collision(std::size_t state) const;

  /// Pedestrian cells hidden from the sensor for the given relative geometry.
  std::vector<std::size_t> occluded_cells(const OcclusionGeometry& geometry, double ego_lateral) const;

  /// Generic view of the full joint model (observation visibility from the
  /// build-time geometry).
  pomdp::DiscretePomdp as_pomdp() const;

  /// QMDP table via a factored Bellman backup (ego stage x pedestrian stage).
  /// Produces the same fixed point as value_iterate(as_pomdp()).
  pomdp::QValueTable solve(const pomdp::SolverOptions& options = {}) const;

  /// Single-action pedestrian-only model for online filtering: the ego is
  /// known to have advanced `advance` metres, appearance and visibility come
  /// from the current relative geometry.
  pomdp::DiscretePomdp tracking_model(double advance, const OcclusionGeometry& geometry,
                                      double ego_lateral) const;

  /// Occlusion-aware prior: absent with probability 1 - p_appear, otherwise
  /// uniform over the currently occluded cells.
  pomdp::Belief occlusion_prior(const OcclusionGeometry& geometry, double ego_lateral) const;

  /// Interpolation weights of a continuous ego state over the ego grid.
  std::vector<std::pair<std::size_t, double>> ego_weights(double speed, double lateral) const;

  /// Q restricted to pedestrian states for a known ego state.
  pomdp::QValueTable pedestrian_q(const pomdp::QValueTable& joint, double speed, double lateral) const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

}  // namespace pedplan::ped
