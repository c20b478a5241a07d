#include "model/pedestrian_pomdp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "common/errors.hpp"

namespace pedplan::ped {

using pomdp::Successor;
using pomdp::SparseDistribution;

namespace {

constexpr double kEdgeEps = 1e-9;
constexpr double kSqrt2Pi = 2.5066282746310002;

void check_axis(const Axis& axis, const char* name) {
  if (axis.levels < 2) throw ConfigError(std::string(name) + ": need at least two levels");
  if (!(axis.hi > axis.lo) || !std::isfinite(axis.lo) || !std::isfinite(axis.hi)) {
    throw ConfigError(std::string(name) + ": empty or invalid range");
  }
}

double gaussian(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * kSqrt2Pi);
}

double wrap_angle(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

struct ShiftEntry {
  int s_level;  // -1: the pedestrian left the modelled region
  double weight;
};
using ShiftRow = std::array<ShiftEntry, 2>;

struct EgoRow {
  std::array<std::pair<std::size_t, double>, 4> next{};
  int count = 0;
  double advance = 0.0;
  double base_reward = 0.0;
};

}  // namespace

void DiscretizationSpec::validate() const {
  check_axis(ego_speed, "ego_speed");
  check_axis(ego_lateral, "ego_lateral");
  check_axis(ped_s, "ped_s");
  check_axis(ped_t, "ped_t");
  check_axis(ped_speed, "ped_speed");
  check_axis(ped_heading, "ped_heading");
  if (ego_speed.lo < 0.0 || ped_speed.lo < 0.0) throw ConfigError("speed ranges must be non-negative");
}

std::size_t DiscretizationSpec::ego_count() const {
  return static_cast<std::size_t>(ego_speed.levels) * ego_lateral.levels;
}

std::size_t DiscretizationSpec::ped_cell_count() const {
  return static_cast<std::size_t>(ped_s.levels) * ped_t.levels * ped_speed.levels * ped_heading.levels;
}

std::vector<Action> ActionSpec::joint() const {
  std::vector<Action> out;
  out.reserve(longitudinal.size() * lateral.size());
  for (double lon : longitudinal) {
    for (double lat : lateral) out.push_back({lon, lat});
  }
  return out;
}

void RewardParams::validate() const {
  if (!(collision_penalty < 0.0)) throw ConfigError("collision_penalty must be negative");
  if (velocity_weight < 0.0 || lane_center_weight < 0.0) throw ConfigError("reward weights must be >= 0");
  if (longitudinal_action_penalty > 0.0 || lateral_action_penalty > 0.0) {
    throw ConfigError("action penalties must be <= 0");
  }
}

EgoStep ego_transition(double speed, double lateral, Action action, double dt, double max_speed,
                       double lateral_limit) {
  const double a = action.longitudinal;
  double next = speed + a * dt;
  double advance = 0.0;
  if (next <= 0.0) {
    // Stops within the step; no reverse motion.
    next = 0.0;
    advance = a < 0.0 ? speed * speed / (-2.0 * a) : 0.0;
  } else if (next >= max_speed && a > 0.0) {
    const double t_cap = std::max(0.0, (max_speed - speed) / a);
    next = max_speed;
    advance = speed * t_cap + 0.5 * a * t_cap * t_cap + max_speed * (dt - t_cap);
  } else {
    next = std::min(next, std::max(max_speed, speed));
    advance = speed * dt + 0.5 * a * dt * dt;
  }
  const double lat = std::clamp(lateral + 0.5 * action.lateral * dt * dt, -lateral_limit, lateral_limit);
  return {next, lat, advance};
}

bool in_collision(double ped_s, double ped_t, double ego_lateral, const Footprint& footprint) {
  return std::abs(ped_s) <= 0.5 * footprint.length + kEdgeEps &&
         std::abs(ped_t - ego_lateral) <= 0.5 * footprint.width + kEdgeEps;
}

double reward(double ego_speed, double ego_lateral, bool collision, Action action,
              const RewardParams& params) {
  if (collision) return params.collision_penalty;
  const double deficit_kmh = std::max(0.0, params.desired_speed_kmh - ego_speed / kKmh);
  double r = -params.velocity_weight * deficit_kmh - params.lane_center_weight * std::abs(ego_lateral);
  if (action.longitudinal != 0.0) r += params.longitudinal_action_penalty;
  if (action.lateral != 0.0) r += params.lateral_action_penalty;
  return r;
}

LikelihoodWidths grid_likelihood_widths(const SensorNoise& noise, const DiscretizationSpec& d) {
  auto widen = [](double sigma, const Axis& axis) {
    const double h = axis.levels > 1 ? axis.spacing() : 0.0;
    return std::sqrt(sigma * sigma + h * h / 6.0);
  };
  return {widen(noise.position_std, d.ped_s), widen(noise.position_std, d.ped_t), widen(noise.speed_std, d.ped_speed),
          widen(noise.heading_std, d.ped_heading)};
}

double observation_likelihood(pomdp::ObservationView observation, const std::optional<PedPoint>& cell,
                              bool visible, const SensorNoise& noise) {
  return observation_likelihood(observation, cell, visible,
                                LikelihoodWidths{noise.position_std, noise.position_std, noise.speed_std,
                                                 noise.heading_std});
}

double observation_likelihood(pomdp::ObservationView observation, const std::optional<PedPoint>& cell,
                              bool visible, const LikelihoodWidths& widths) {
  const bool detected = !observation.empty();
  if (!cell || !visible) return detected ? 0.0 : 1.0;
  if (!detected) return 0.0;
  if (observation.size() != PedestrianPomdp::kObservationSize) {
    throw DimensionError("pedestrian observations carry (s, t, speed, heading)");
  }
  return gaussian(observation[0], cell->s, widths.s) * gaussian(observation[1], cell->t, widths.t) *
         gaussian(observation[2], cell->speed, widths.speed) *
         gaussian(wrap_angle(observation[3] - cell->heading), 0.0, widths.heading);
}

struct PedestrianPomdp::Data {
  ModelConfig cfg;
  LikelihoodWidths widths;
  std::vector<Action> actions;
  int n_es = 0, n_el = 0, ns = 0, nt = 0, nv = 0, nh = 0;
  std::size_t ne = 0, np = 0, block = 0;
  double exit_margin = 0.0;

  std::vector<std::size_t> own_offsets;
  std::vector<Successor> own_entries;

  std::vector<EgoRow> ego_rows;      // (ego, action)
  std::vector<ShiftRow> shift_rows;  // ((ego, action), s level)
  std::vector<char> collision;       // (lateral level, s level, t level)
  std::vector<char> visible;         // same layout, build-time geometry

  std::size_t absent() const { return np; }
  std::size_t ped_states() const { return np + 1; }
  int s_level(std::size_t ped) const { return static_cast<int>(ped / block); }
  int t_level(std::size_t ped) const { return static_cast<int>((ped / (nv * nh)) % nt); }
  int lateral_level(std::size_t ego) const { return static_cast<int>(ego % n_el); }
  std::size_t flag_index(int lat, int s, int t) const { return (static_cast<std::size_t>(lat) * ns + s) * nt + t; }

  PedPoint center(std::size_t ped) const {
    const auto& d = cfg.discretization;
    const int h = static_cast<int>(ped % nh);
    const int v = static_cast<int>((ped / nh) % nv);
    return {d.ped_s.value(s_level(ped)), d.ped_t.value(t_level(ped)), d.ped_speed.value(v),
            d.ped_heading.value(h)};
  }

  std::span<const Successor> own_row(std::size_t ped) const {
    return {own_entries.data() + own_offsets[ped], own_offsets[ped + 1] - own_offsets[ped]};
  }

  ShiftRow shift_for(int s, double advance) const {
    const Axis& axis = cfg.discretization.ped_s;
    const double moved = axis.value(s) - advance;
    if (moved < axis.lo - exit_margin - kEdgeEps) return {{{-1, 1.0}, {-1, 0.0}}};
    const auto w = axis.bracket(moved);
    return {{{w[0].index, w[0].weight}, {w[1].index, w[1].weight}}};
  }

  std::vector<std::size_t> occluded(const OcclusionGeometry& geometry, double ego_lateral) const {
    std::vector<std::size_t> out;
    if (geometry.empty()) return out;
    const auto& d = cfg.discretization;
    for (int s = 0; s < ns; ++s) {
      for (int t = 0; t < nt; ++t) {
        if (occlusion_check({0.0, ego_lateral}, {d.ped_s.value(s), d.ped_t.value(t)}, geometry)) continue;
        const std::size_t first = (static_cast<std::size_t>(s) * nt + t) * nv * nh;
        for (std::size_t k = 0; k < static_cast<std::size_t>(nv * nh); ++k) out.push_back(first + k);
      }
    }
    return out;
  }

  SparseDistribution appearance_row(const std::vector<std::size_t>& hidden) const {
    if (hidden.empty()) return {{absent(), 1.0}};
    const double p = cfg.appearance.p_appear;
    SparseDistribution row;
    row.reserve(hidden.size() + 1);
    row.push_back({absent(), 1.0 - p});
    const double each = p / static_cast<double>(hidden.size());
    for (std::size_t c : hidden) row.push_back({c, each});
    return row;
  }

  SparseDistribution compute_own_row(std::size_t ped) const {
    const auto& d = cfg.discretization;
    const auto& motion = cfg.motion;
    const double dt = cfg.planner_dt;
    const PedPoint c = center(ped);
    const double us = c.speed * std::cos(c.heading);
    const double ut = c.speed * std::sin(c.heading);
    const std::size_t k = motion.accelerations.size();
    const double option_weight = 1.0 / static_cast<double>(k * k);

    std::map<std::size_t, double> acc;
    for (double as : motion.accelerations) {
      for (double at : motion.accelerations) {
        double ns_ = std::max(0.0, us + as * dt);
        double nt_ = ut + at * dt;
        double speed = std::hypot(ns_, nt_);
        if (speed > motion.max_speed) {
          ns_ *= motion.max_speed / speed;
          nt_ *= motion.max_speed / speed;
          speed = motion.max_speed;
        }
        const double heading = speed > 1e-12 ? std::atan2(nt_, ns_) : c.heading;
        double s = c.s + 0.5 * (us + ns_) * dt;
        const double t = c.t + 0.5 * (ut + nt_) * dt;
        if (t < d.ped_t.lo - kEdgeEps || t > d.ped_t.hi + kEdgeEps || s > d.ped_s.hi + kEdgeEps ||
            s < d.ped_s.lo - exit_margin - kEdgeEps) {
          acc[absent()] += option_weight;
          continue;
        }
        s = std::max(s, d.ped_s.lo);
        const auto ws = d.ped_s.bracket(s);
        const auto wt = d.ped_t.bracket(t);
        const auto wv = d.ped_speed.bracket(speed);
        const auto wh = d.ped_heading.bracket(heading);
        for (const auto& a : ws) {
          if (a.weight == 0.0) continue;
          for (const auto& b : wt) {
            if (b.weight == 0.0) continue;
            for (const auto& v : wv) {
              if (v.weight == 0.0) continue;
              for (const auto& h : wh) {
                if (h.weight == 0.0) continue;
                const std::size_t idx =
                    ((static_cast<std::size_t>(a.index) * nt + b.index) * nv + v.index) * nh + h.index;
                acc[idx] += option_weight * a.weight * b.weight * v.weight * h.weight;
              }
            }
          }
        }
      }
    }
    SparseDistribution row;
    row.reserve(acc.size());
    for (const auto& [idx, p] : acc) row.push_back({idx, p});
    return row;
  }
};

PedestrianPomdp::PedestrianPomdp(ModelConfig config) {
  auto data = std::make_shared<Data>();
  Data& d = *data;
  config.discretization.validate();
  config.reward.validate();
  if (!(config.planner_dt > 0.0)) throw ConfigError("planner_dt must be positive");
  if (!(config.discount >= 0.0 && config.discount < 1.0)) throw ConfigError("discount must lie in [0, 1)");
  if (config.appearance.p_appear < 0.0 || config.appearance.p_appear > 1.0) {
    throw ConfigError("p_appear must lie in [0, 1]");
  }
  if (config.actions.longitudinal.empty() || config.actions.lateral.empty()) {
    throw ConfigError("action sets must be non-empty");
  }
  if (config.motion.accelerations.empty() || !(config.motion.max_speed > 0.0)) {
    throw ConfigError("pedestrian motion needs accelerations and a positive max speed");
  }
  if (!(config.noise.position_std > 0.0 && config.noise.speed_std > 0.0 && config.noise.heading_std > 0.0)) {
    throw ConfigError("sensor noise standard deviations must be positive");
  }
  d.cfg = std::move(config);
  const auto& disc = d.cfg.discretization;
  d.actions = d.cfg.actions.joint();
  d.widths = grid_likelihood_widths(d.cfg.noise, disc);
  d.n_es = disc.ego_speed.levels;
  d.n_el = disc.ego_lateral.levels;
  d.ns = disc.ped_s.levels;
  d.nt = disc.ped_t.levels;
  d.nv = disc.ped_speed.levels;
  d.nh = disc.ped_heading.levels;
  d.ne = disc.ego_count();
  d.np = disc.ped_cell_count();
  d.block = static_cast<std::size_t>(d.nt) * d.nv * d.nh;
  d.exit_margin = 0.5 * d.cfg.footprint.length;

  // Pedestrian own motion.
  const auto hidden = d.occluded(d.cfg.occlusion, 0.0);
  d.own_offsets.reserve(d.np + 2);
  d.own_offsets.push_back(0);
  for (std::size_t p = 0; p < d.np; ++p) {
    const auto row = d.compute_own_row(p);
    d.own_entries.insert(d.own_entries.end(), row.begin(), row.end());
    d.own_offsets.push_back(d.own_entries.size());
  }
  const auto absent_row = d.appearance_row(hidden);
  d.own_entries.insert(d.own_entries.end(), absent_row.begin(), absent_row.end());
  d.own_offsets.push_back(d.own_entries.size());

  // Ego stage.
  const std::size_t na = d.actions.size();
  d.ego_rows.resize(d.ne * na);
  d.shift_rows.resize(d.ne * na * d.ns);
  for (int vi = 0; vi < d.n_es; ++vi) {
    for (int li = 0; li < d.n_el; ++li) {
      const std::size_t e = static_cast<std::size_t>(vi) * d.n_el + li;
      const double speed = disc.ego_speed.value(vi);
      const double lateral = disc.ego_lateral.value(li);
      for (std::size_t a = 0; a < na; ++a) {
        const EgoStep step = ego_transition(speed, lateral, d.actions[a], d.cfg.planner_dt, disc.ego_speed.hi,
                                            std::max(std::abs(disc.ego_lateral.lo), std::abs(disc.ego_lateral.hi)));
        EgoRow& row = d.ego_rows[e * na + a];
        row.advance = step.advance;
        row.base_reward = ped::reward(speed, lateral, false, d.actions[a], d.cfg.reward);
        for (const auto& wv : disc.ego_speed.bracket(step.speed)) {
          if (wv.weight == 0.0) continue;
          for (const auto& wl : disc.ego_lateral.bracket(step.lateral)) {
            if (wl.weight == 0.0) continue;
            row.next[row.count++] = {static_cast<std::size_t>(wv.index) * d.n_el + wl.index, wv.weight * wl.weight};
          }
        }
        for (int s = 0; s < d.ns; ++s) d.shift_rows[(e * na + a) * d.ns + s] = d.shift_for(s, step.advance);
      }
    }
  }

  d.collision.resize(static_cast<std::size_t>(d.n_el) * d.ns * d.nt);
  d.visible.resize(d.collision.size());
  for (int li = 0; li < d.n_el; ++li) {
    const double lateral = disc.ego_lateral.value(li);
    for (int s = 0; s < d.ns; ++s) {
      for (int t = 0; t < d.nt; ++t) {
        const Vec2 cell{disc.ped_s.value(s), disc.ped_t.value(t)};
        d.collision[d.flag_index(li, s, t)] = in_collision(cell.s, cell.t, lateral, d.cfg.footprint);
        d.visible[d.flag_index(li, s, t)] = occlusion_check({0.0, lateral}, cell, d.cfg.occlusion);
      }
    }
  }
  data_ = std::move(data);
}

const ModelConfig& PedestrianPomdp::config() const { return data_->cfg; }
const std::vector<Action>& PedestrianPomdp::actions() const { return data_->actions; }
const LikelihoodWidths& PedestrianPomdp::likelihood_widths() const { return data_->widths; }
std::size_t PedestrianPomdp::ego_count() const { return data_->ne; }
std::size_t PedestrianPomdp::ped_cell_count() const { return data_->np; }

std::size_t PedestrianPomdp::ego_index(int speed_level, int lateral_level) const {
  return static_cast<std::size_t>(speed_level) * data_->n_el + lateral_level;
}

std::size_t PedestrianPomdp::ped_index(int s_level, int t_level, int speed_level, int heading_level) const {
  const Data& d = *data_;
  return ((static_cast<std::size_t>(s_level) * d.nt + t_level) * d.nv + speed_level) * d.nh + heading_level;
}

double PedestrianPomdp::ego_speed(std::size_t ego) const {
  return data_->cfg.discretization.ego_speed.value(static_cast<int>(ego / data_->n_el));
}

double PedestrianPomdp::ego_lateral(std::size_t ego) const {
  return data_->cfg.discretization.ego_lateral.value(data_->lateral_level(ego));
}

PedPoint PedestrianPomdp::cell_center(std::size_t ped) const {
  if (ped >= data_->np) throw UsageError("cell_center: the absent state has no position");
  return data_->center(ped);
}

SparseDistribution PedestrianPomdp::pedestrian_transition(std::size_t ped) const {
  if (ped > data_->np) throw DimensionError("pedestrian state out of range");
  const auto row = data_->own_row(ped);
  return {row.begin(), row.end()};
}

void PedestrianPomdp::shift(std::size_t ped, double advance, SparseDistribution& out) const {
  const Data& d = *data_;
  out.clear();
  if (ped == d.absent()) {
    out.push_back({ped, 1.0});
    return;
  }
  const std::size_t rest = ped % d.block;
  for (const auto& [level, w] : d.shift_for(d.s_level(ped), advance)) {
    if (w == 0.0) continue;
    out.push_back({level < 0 ? d.absent() : static_cast<std::size_t>(level) * d.block + rest, w});
  }
}

void PedestrianPomdp::transition(std::size_t state, std::size_t action, SparseDistribution& out) const {
  const Data& d = *data_;
  out.clear();
  const std::size_t nps = d.ped_states();
  const std::size_t e = state / nps;
  const std::size_t p = state % nps;
  const EgoRow& er = d.ego_rows[e * d.actions.size() + action];
  SparseDistribution shifted;
  shift(p, er.advance, shifted);
  for (int k = 0; k < er.count; ++k) {
    const auto [e_next, we] = er.next[k];
    for (const auto& [mid, ws] : shifted) {
      for (const auto& [p_next, wo] : d.own_row(mid)) out.push_back({e_next * nps + p_next, we * ws * wo});
    }
  }
}

bool PedestrianPomdp::is_collision(std::size_t state) const {
  const Data& d = *data_;
  const std::size_t nps = d.ped_states();
  const std::size_t p = state % nps;
  if (p == d.absent()) return false;
  return d.collision[d.flag_index(d.lateral_level(state / nps), d.s_level(p), d.t_level(p))] != 0;
}

double PedestrianPomdp::reward(std::size_t state, std::size_t action) const {
  const Data& d = *data_;
  if (is_collision(state)) return d.cfg.reward.collision_penalty;
  return d.ego_rows[(state / d.ped_states()) * d.actions.size() + action].base_reward;
}

std::vector<std::size_t> PedestrianPomdp::occluded_cells(const OcclusionGeometry& geometry,
                                                         double ego_lateral) const {
  return data_->occluded(geometry, ego_lateral);
}

pomdp::DiscretePomdp PedestrianPomdp::as_pomdp() const {
  pomdp::DiscretePomdp model;
  model.state_count = state_count();
  model.action_count = action_count();
  model.discount = data_->cfg.discount;
  const PedestrianPomdp self = *this;
  model.transition = [self](std::size_t s, std::size_t a, SparseDistribution& out) { self.transition(s, a, out); };
  model.reward = [self](std::size_t s, std::size_t a) { return self.reward(s, a); };
  model.observation_likelihood = [data = data_](pomdp::ObservationView o, std::size_t next) {
    const std::size_t nps = data->ped_states();
    const std::size_t p = next % nps;
    if (p == data->absent()) return observation_likelihood(o, std::nullopt, false, data->widths);
    const bool visible =
        data->visible[data->flag_index(data->lateral_level(next / nps), data->s_level(p), data->t_level(p))] != 0;
    return observation_likelihood(o, data->center(p), visible, data->widths);
  };
  return model;
}

pomdp::QValueTable PedestrianPomdp::solve(const pomdp::SolverOptions& options) const {
  if (!(options.tolerance > 0.0)) throw UsageError("solve: tolerance must be positive");
  if (options.max_iterations < 1) throw UsageError("solve: max_iterations must be >= 1");
  const Data& d = *data_;
  const std::size_t na = d.actions.size();
  const std::size_t nps = d.ped_states();
  const std::size_t n = d.ne * nps;
  const double gamma = d.cfg.discount;
  const double penalty = d.cfg.reward.collision_penalty;

  pomdp::QValueTable q;
  q.state_count = n;
  q.action_count = na;
  q.tolerance = options.tolerance;
  q.residual = std::numeric_limits<double>::infinity();
  q.values.assign(n * na, 0.0);
  std::vector<double> next(n * na);
  std::vector<double> value(n);
  std::vector<double> carried(n);  // own motion applied to the value: W(e', p'')
  std::vector<char> collision(n);
  for (std::size_t s = 0; s < n; ++s) collision[s] = is_collision(s);

  while (q.iterations < options.max_iterations) {
    for (std::size_t s = 0; s < n; ++s) {
      const double* qs = &q.values[s * na];
      value[s] = *std::max_element(qs, qs + na);
    }
    for (std::size_t e = 0; e < d.ne; ++e) {
      const double* v = &value[e * nps];
      double* w = &carried[e * nps];
      for (std::size_t p = 0; p < nps; ++p) {
        double sum = 0.0;
        for (std::size_t k = d.own_offsets[p]; k < d.own_offsets[p + 1]; ++k) {
          sum += d.own_entries[k].probability * v[d.own_entries[k].state];
        }
        w[p] = sum;
      }
    }

    double residual = 0.0;
    for (std::size_t e = 0; e < d.ne; ++e) {
      for (std::size_t a = 0; a < na; ++a) {
        const EgoRow& er = d.ego_rows[e * na + a];
        const ShiftRow* shifts = &d.shift_rows[(e * na + a) * d.ns];
        const double base = er.base_reward;
        // Absent pedestrian.
        {
          double cont = 0.0;
          for (int k = 0; k < er.count; ++k) cont += er.next[k].second * carried[er.next[k].first * nps + d.absent()];
          const std::size_t s = e * nps + d.absent();
          const double val = base + gamma * cont;
          residual = std::max(residual, std::abs(val - q.values[s * na + a]));
          next[s * na + a] = val;
        }
        for (int sl = 0; sl < d.ns; ++sl) {
          const ShiftRow& sh = shifts[sl];
          for (std::size_t r = 0; r < d.block; ++r) {
            const std::size_t p = static_cast<std::size_t>(sl) * d.block + r;
            double cont = 0.0;
            for (int k = 0; k < er.count; ++k) {
              const double* w = &carried[er.next[k].first * nps];
              double inner = 0.0;
              for (const auto& [level, ws] : sh) {
                if (ws == 0.0) continue;
                inner += ws * (level < 0 ? w[d.absent()] : w[static_cast<std::size_t>(level) * d.block + r]);
              }
              cont += er.next[k].second * inner;
            }
            const std::size_t s = e * nps + p;
            const double val = (collision[s] ? penalty : base) + gamma * cont;
            residual = std::max(residual, std::abs(val - q.values[s * na + a]));
            next[s * na + a] = val;
          }
        }
      }
    }
    q.values.swap(next);
    ++q.iterations;
    q.residual = residual;
    if (options.on_sweep) options.on_sweep(q.iterations, residual);
    if (residual <= options.tolerance) break;
  }
  return q;
}

pomdp::DiscretePomdp PedestrianPomdp::tracking_model(double advance, const OcclusionGeometry& geometry,
                                                     double ego_lateral) const {
  const Data& d = *data_;
  const std::size_t nps = d.ped_states();
  auto absent_row = std::make_shared<SparseDistribution>(d.appearance_row(d.occluded(geometry, ego_lateral)));
  auto visible = std::make_shared<std::vector<char>>(static_cast<std::size_t>(d.ns) * d.nt);
  const auto& disc = d.cfg.discretization;
  for (int s = 0; s < d.ns; ++s) {
    for (int t = 0; t < d.nt; ++t) {
      (*visible)[static_cast<std::size_t>(s) * d.nt + t] =
          occlusion_check({0.0, ego_lateral}, {disc.ped_s.value(s), disc.ped_t.value(t)}, geometry);
    }
  }

  pomdp::DiscretePomdp model;
  model.state_count = nps;
  model.action_count = 1;
  model.discount = d.cfg.discount;
  const PedestrianPomdp self = *this;
  model.transition = [self, advance, absent_row](std::size_t s, std::size_t, SparseDistribution& out) {
    const Data& dd = *self.data_;
    out.clear();
    SparseDistribution shifted;
    self.shift(s, advance, shifted);
    for (const auto& [mid, ws] : shifted) {
      if (mid == dd.absent()) {
        for (const auto& [p, w] : *absent_row) out.push_back({p, ws * w});
      } else {
        for (const auto& [p, w] : dd.own_row(mid)) out.push_back({p, ws * w});
      }
    }
  };
  model.reward = [](std::size_t, std::size_t) { return 0.0; };
  model.observation_likelihood = [data = data_, visible](pomdp::ObservationView o, std::size_t p) {
    if (p == data->absent()) return observation_likelihood(o, std::nullopt, false, data->widths);
    const bool vis = (*visible)[static_cast<std::size_t>(data->s_level(p)) * data->nt + data->t_level(p)] != 0;
    return observation_likelihood(o, data->center(p), vis, data->widths);
  };
  return model;
}

pomdp::Belief PedestrianPomdp::occlusion_prior(const OcclusionGeometry& geometry, double ego_lateral) const {
  const Data& d = *data_;
  const auto row = d.appearance_row(d.occluded(geometry, ego_lateral));
  pomdp::Belief b{std::vector<double>(d.ped_states(), 0.0)};
  for (const auto& [p, w] : row) b.mass[p] += w;
  return b;
}

std::vector<std::pair<std::size_t, double>> PedestrianPomdp::ego_weights(double speed, double lateral) const {
  const auto& disc = data_->cfg.discretization;
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& wv : disc.ego_speed.bracket(speed)) {
    if (wv.weight == 0.0) continue;
    for (const auto& wl : disc.ego_lateral.bracket(lateral)) {
      if (wl.weight == 0.0) continue;
      out.emplace_back(ego_index(wv.index, wl.index), wv.weight * wl.weight);
    }
  }
  return out;
}

pomdp::QValueTable PedestrianPomdp::pedestrian_q(const pomdp::QValueTable& joint, double speed,
                                                 double lateral) const {
  if (joint.state_count != state_count() || joint.action_count != action_count()) {
    throw DimensionError("Q table does not match this model");
  }
  const std::size_t nps = ped_state_count();
  const std::size_t na = action_count();
  pomdp::QValueTable out;
  out.state_count = nps;
  out.action_count = na;
  out.values.assign(nps * na, 0.0);
  out.residual = joint.residual;
  out.iterations = joint.iterations;
  out.tolerance = joint.tolerance;
  for (const auto& [e, w] : ego_weights(speed, lateral)) {
    const double* src = &joint.values[e * nps * na];
    for (std::size_t i = 0; i < nps * na; ++i) out.values[i] += w * src[i];
  }
  return out;
}

}  // namespace pedplan::ped
