#pragma once

// Online side of the POMDP planner: one belief per tracked pedestrian plus a
// hidden slot for a pedestrian that may be standing in the occluded area.

#include <cstddef>
#include <map>
#include <memory>
#include <span>

#include "model/geometry.hpp"
#include "model/pedestrian_pomdp.hpp"
#include "pomdp/discrete_pomdp.hpp"

namespace pedplan::sim {

/// Solved planner: model plus its converged Q table.
struct Policy {
  std::shared_ptr<const ped::PedestrianPomdp> model;
  std::shared_ptr<const pomdp::QValueTable> q;
};

/// Measurement in the world frame.
struct Measurement {
  int id = 0;
  double s = 0.0;
  double t = 0.0;
  double speed = 0.0;
  double heading = 0.0;  // radians from +s
};

struct PlannerDecision {
  std::size_t action = 0;
  double longitudinal = 0.0;
  double lateral = 0.0;
  double utility = 0.0;
  double hidden_mass = 0.0;  // probability that a pedestrian hides in the occluded area
};

class PomdpPlanner {
 public:
  explicit PomdpPlanner(Policy policy);

  void reset(double ego_s, double ego_t, const OcclusionGeometry& world_obstacles);
  PlannerDecision step(double ego_s, double ego_t, double ego_speed, std::span<const Measurement> measurements,
                       const OcclusionGeometry& world_obstacles);

  const pomdp::Belief& hidden_belief() const { return hidden_; }
  std::size_t track_count() const { return tracks_.size(); }

 private:
  pomdp::Belief from_measurement(const std::vector<double>& obs) const;
  /// Relative observation, or empty when the pedestrian is outside the modelled region.
  std::optional<std::vector<double>> to_observation(const Measurement& m, double ego_s) const;

  Policy policy_;
  double last_ego_s_ = 0.0;
  pomdp::Belief hidden_;
  std::map<int, pomdp::Belief> tracks_;
};

}  // namespace pedplan::sim
