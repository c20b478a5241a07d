#include "harness/policy_slice.hpp"

#include <cmath>
#include <cstdio>

#include "common/errors.hpp"

namespace pedplan::harness {

namespace {

int snap(const ped::Axis& axis, double x, const char* what, double display_scale, std::vector<std::string>& warnings) {
  const int level = axis.nearest(x);
  const double used = axis.value(level);
  if (std::abs(used - x) > 1e-9 * std::max(1.0, std::abs(x))) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.6g is off-grid, using nearest level %.6g", what, x / display_scale,
                  used / display_scale);
    warnings.emplace_back(buf);
  }
  return level;
}

}  // namespace

PolicySlice export_policy_slice(const ped::PedestrianPomdp& model, const pomdp::QValueTable& q, double ego_speed_kmh,
                                double ped_speed_kmh, double ped_heading_deg) {
  if (q.state_count != model.state_count() || q.action_count != model.action_count()) {
    throw DimensionError("Q table does not match the slice model");
  }
  const auto& disc = model.config().discretization;
  PolicySlice slice;
  const int ev = snap(disc.ego_speed, ego_speed_kmh * ped::kKmh, "ego speed (km/h)", ped::kKmh, slice.warnings);
  const int el = disc.ego_lateral.nearest(0.0);
  const int pv = snap(disc.ped_speed, ped_speed_kmh * ped::kKmh, "pedestrian speed (km/h)", ped::kKmh, slice.warnings);
  const int ph = snap(disc.ped_heading, ped_heading_deg * ped::kDeg, "pedestrian heading (deg)", ped::kDeg,
                      slice.warnings);
  slice.ego_speed_kmh = disc.ego_speed.value(ev) / ped::kKmh;
  slice.ped_speed = disc.ped_speed.value(pv);
  slice.ped_heading_deg = disc.ped_heading.value(ph) / ped::kDeg;

  const std::size_t ego = model.ego_index(ev, el);
  for (int s = 0; s < disc.ped_s.levels; ++s) slice.s_values.push_back(disc.ped_s.value(s));
  for (int t = 0; t < disc.ped_t.levels; ++t) {
    slice.t_values.push_back(disc.ped_t.value(t));
    std::vector<double> row;
    for (int s = 0; s < disc.ped_s.levels; ++s) {
      const std::size_t state = model.joint_index(ego, model.ped_index(s, t, pv, ph));
      row.push_back(model.actions()[q.greedy_action(state)].longitudinal);
    }
    slice.action.push_back(std::move(row));
  }
  return slice;
}

double braking_onset_distance(const PolicySlice& slice) {
  double onset = -1.0;
  for (const auto& row : slice.action) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] < 0.0) onset = std::max(onset, slice.s_values[i]);
    }
  }
  return onset;
}

void write_slice_csv(const PolicySlice& slice, std::ostream& out) {
  char buf[32];
  out << "t\\s";
  for (double s : slice.s_values) {
    std::snprintf(buf, sizeof buf, "%.9g", s);
    out << ',' << buf;
  }
  out << '\n';
  for (std::size_t r = 0; r < slice.t_values.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.9g", slice.t_values[r]);
    out << buf;
    for (double a : slice.action[r]) {
      std::snprintf(buf, sizeof buf, "%.9g", a);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace pedplan::harness
