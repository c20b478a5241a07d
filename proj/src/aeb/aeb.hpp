#pragma once

// Last-resort emergency braking: predict every tracked pedestrian, estimate
// the collision probability against the planned ego motion, and request a
// full brake once braking later would no longer stop the ego in time.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "model/geometry.hpp"

namespace pedplan::aeb {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct AebConfig {
  double a_max = -10.0;
  double p_c_threshold = 0.5;
  double risk_threshold = 0.99;
  double brake_delay = 0.2;
  double prediction_horizon = 3.0;
  double prediction_dt = 0.05;
  int prediction_sample_count = 200;
  /// Isotropic position sigma grows by this much per second of look-ahead.
  double sigma_growth = 0.5;
  std::uint64_t seed = 0;
  double ped_radius = 0.3;
  /// Distance kept between the stopped front bumper and the pedestrian.
  double stop_margin = 1.0;

  void validate() const;
};

struct PedTrack {
  int id = 0;
  Vec2 position;
  Vec2 velocity;
  double timestamp = 0.0;
};

/// Planned ego motion: constant acceleration from the current state, clamped
/// at standstill and at max_speed. Positions refer to the ego centre.
struct EgoTrajectory {
  double s = 0.0;
  double t = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  double max_speed = kInf;
  double length = 4.5;
  double width = 1.8;

  double front() const { return s + 0.5 * length; }
  /// Centre position and speed after `tau` seconds.
  std::pair<double, double> at(double tau) const;
};

/// Time for which the ego can keep following the trajectory before a full
/// brake (a_max, after brake_delay) has to start to stop the front bumper at
/// `collision_point_s`. +inf if the ego stops short anyway; <= 0 when even an
/// immediate brake cannot stop in time.
double compute_ttb(const EgoTrajectory& trajectory, double collision_point_s, const AebConfig& cfg);

/// Full-brake stopping distance from `speed`, including the actuation delay.
double stopping_distance(double speed, const AebConfig& cfg);

/// Deterministic sample cloud: constant-velocity mean plus per-sample offsets
/// scaled by a sigma that grows linearly with look-ahead time.
struct Prediction {
  double dt = 0.05;
  std::vector<double> times;
  std::vector<Vec2> mean;
  std::vector<double> sigma;
  std::vector<Vec2> offsets;  // unit-variance 2D normal offsets, one per sample
  std::vector<double> weights;

  std::size_t steps() const { return times.size(); }
  std::size_t sample_count() const { return offsets.size(); }
  Vec2 sample(std::size_t j, std::size_t k) const {
    return {mean[k].s + sigma[k] * offsets[j].s, mean[k].t + sigma[k] * offsets[j].t};
  }
};

Prediction predict_pedestrian(const PedTrack& track, double horizon, const AebConfig& cfg);

/// Weighted fraction of sample trajectories that enter the ego footprint at
/// any shared time step.
double collision_probability(const Prediction& prediction, const EgoTrajectory& trajectory);

/// min(ttb_used / ttc, 1) clamped to [0, 1]; 0 for an infinite TTC.
double risk_metric(double ttb_used, double ttc);

struct AebDecision {
  int track_id = -1;
  double p_c = 0.0;
  double ttc = kInf;
  double ttb = kInf;
  double ttb_used = 0.0;
  double risk = 0.0;
  bool brake = false;
};

/// Brake iff both thresholds are exceeded.
bool should_brake(double p_c, double risk, const AebConfig& cfg);

/// Evaluate a single pedestrian. TTC and risk are only computed when P_c
/// exceeds its threshold.
AebDecision assess_pedestrian(const PedTrack& track, const EgoTrajectory& trajectory, const AebConfig& cfg);

/// Evaluate every pedestrian; reports the most critical one.
AebDecision aeb_step(std::span<const PedTrack> tracks, const EgoTrajectory& trajectory, const AebConfig& cfg);

}  // namespace pedplan::aeb
