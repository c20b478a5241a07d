#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "model/pedestrian_pomdp.hpp"
#include "pomdp/discrete_pomdp.hpp"

namespace pedplan::harness {

/// Greedy longitudinal action over the (s, t) grid for fixed ego and pedestrian speed/heading.
struct PolicySlice {
  double ego_speed_kmh = 0.0;  // grid level actually used
  double ped_speed = 0.0;
  double ped_heading_deg = 0.0;
  std::vector<double> s_values;
  std::vector<double> t_values;
  std::vector<std::vector<double>> action;  // [t][s]
  std::vector<std::string> warnings;
};

/// The ego lateral position is the lane centre level. Off-grid coordinates
/// snap to the nearest level with a warning.
PolicySlice export_policy_slice(const ped::PedestrianPomdp& model, const pomdp::QValueTable& q, double ego_speed_kmh,
                                double ped_speed_kmh, double ped_heading_deg);

/// Largest s with a braking action in any row; -1 when the slice never brakes.
double braking_onset_distance(const PolicySlice& slice);

void write_slice_csv(const PolicySlice& slice, std::ostream& out);

}  // namespace pedplan::harness
