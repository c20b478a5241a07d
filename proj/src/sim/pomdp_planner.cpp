#include "sim/pomdp_planner.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "common/errors.hpp"

namespace pedplan::sim {

namespace {

constexpr double kMinMass = 1e-12;

}  // namespace

PomdpPlanner::PomdpPlanner(Policy policy) : policy_(std::move(policy)) {
  if (!policy_.model || !policy_.q) throw UsageError("POMDP planner needs a model and a solved Q table");
  if (!policy_.q->converged()) throw NotConvergedError("POMDP planner refuses a non-converged Q table");
  if (policy_.q->state_count != policy_.model->state_count() ||
      policy_.q->action_count != policy_.model->action_count()) {
    throw DimensionError("Q table does not match the planner model");
  }
}

void PomdpPlanner::reset(double ego_s, double ego_t, const OcclusionGeometry& world_obstacles) {
  last_ego_s_ = ego_s;
  tracks_.clear();
  hidden_ = policy_.model->occlusion_prior(world_obstacles.relative_to(ego_s, 0.0), ego_t);
}

std::optional<std::vector<double>> PomdpPlanner::to_observation(const Measurement& m, double ego_s) const {
  const auto& cfg = policy_.model->config();
  const auto& disc = cfg.discretization;
  const double s = m.s - ego_s;
  // Within one cell of the lateral edge the pedestrian is folded onto the edge row.
  const double t_margin = disc.ped_t.spacing();
  if (s < -0.5 * cfg.footprint.length || s > disc.ped_s.hi || m.t < disc.ped_t.lo - t_margin ||
      m.t > disc.ped_t.hi + t_margin) {
    return std::nullopt;
  }
  return std::vector<double>{std::max(s, disc.ped_s.lo), std::clamp(m.t, disc.ped_t.lo, disc.ped_t.hi),
                             std::clamp(m.speed, disc.ped_speed.lo, disc.ped_speed.hi),
                             std::clamp(m.heading, disc.ped_heading.lo, disc.ped_heading.hi)};
}

pomdp::Belief PomdpPlanner::from_measurement(const std::vector<double>& obs) const {
  const auto& model = *policy_.model;
  const auto& widths = model.likelihood_widths();
  pomdp::Belief b{std::vector<double>(model.ped_state_count(), 0.0)};
  double total = 0.0;
  for (std::size_t p = 0; p < model.ped_cell_count(); ++p) {
    // Visibility is ignored here: the detection itself proves the pedestrian is visible.
    b.mass[p] = ped::observation_likelihood(obs, model.cell_center(p), true, widths);
    total += b.mass[p];
  }
  if (!(total > kMinMass)) return pomdp::Belief::delta(model.ped_state_count(), model.absent_index());
  for (double& m : b.mass) m /= total;
  return b;
}

PlannerDecision PomdpPlanner::step(double ego_s, double ego_t, double ego_speed,
                                   std::span<const Measurement> measurements,
                                   const OcclusionGeometry& world_obstacles) {
  const auto& model = *policy_.model;
  const OcclusionGeometry relative = world_obstacles.relative_to(ego_s, 0.0);
  const pomdp::DiscretePomdp tracking = model.tracking_model(ego_s - last_ego_s_, relative, ego_t);
  last_ego_s_ = ego_s;

  try {
    hidden_ = pomdp::belief_update(hidden_, 0, {}, tracking);
  } catch (const DegenerateBeliefError&) {
    hidden_ = model.occlusion_prior(relative, ego_t);
  }

  std::map<int, const Measurement*> by_id;
  for (const Measurement& m : measurements) by_id[m.id] = &m;

  for (auto& [id, belief] : tracks_) {
    if (by_id.count(id) == 0) {
      try {
        belief = pomdp::belief_update(belief, 0, {}, tracking);
      } catch (const DegenerateBeliefError&) {
        belief = model.occlusion_prior(relative, ego_t);
      }
    }
  }
  for (const auto& [id, m] : by_id) {
    const auto obs = to_observation(*m, ego_s);
    if (!obs) {
      tracks_[id] = pomdp::Belief::delta(model.ped_state_count(), model.absent_index());
      continue;
    }
    auto it = tracks_.find(id);
    if (it == tracks_.end()) {
      tracks_.emplace(id, from_measurement(*obs));
      continue;
    }
    try {
      it->second = pomdp::belief_update(it->second, 0, *obs, tracking);
    } catch (const DegenerateBeliefError&) {
      it->second = from_measurement(*obs);
    }
  }

  std::vector<pomdp::Belief> slots;
  slots.reserve(tracks_.size() + 1);
  slots.push_back(hidden_);
  for (const auto& [id, belief] : tracks_) slots.push_back(belief);

  const pomdp::QValueTable q = model.pedestrian_q(*policy_.q, ego_speed, ego_t);
  const pomdp::ActionChoice choice = pomdp::decomposed_action(slots, q);

  PlannerDecision d;
  d.action = choice.action;
  d.utility = choice.utility;
  d.longitudinal = model.actions()[choice.action].longitudinal;
  d.lateral = model.actions()[choice.action].lateral;
  d.hidden_mass = 1.0 - hidden_.mass[model.absent_index()];
  return d;
}

}  // namespace pedplan::sim
