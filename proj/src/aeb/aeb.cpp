#include "aeb/aeb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "common/errors.hpp"

namespace pedplan::aeb {

namespace {

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= static_cast<double>(base);
  }
  return result;
}

// Strict "a is more critical than b" ordering used for the max-risk reduction.
bool more_critical(const AebDecision& a, const AebDecision& b) {
  if (a.brake != b.brake) return a.brake;
  if (a.risk != b.risk) return a.risk > b.risk;
  if (a.p_c != b.p_c) return a.p_c > b.p_c;
  if (a.ttc != b.ttc) return a.ttc < b.ttc;
  return a.track_id < b.track_id;
}

}  // namespace

void AebConfig::validate() const {
  if (!(a_max < 0.0)) throw ConfigError("aeb.a_max must be negative");
  if (!(p_c_threshold > 0.0 && p_c_threshold <= 1.0)) throw ConfigError("aeb.p_c_threshold must lie in (0, 1]");
  if (!(risk_threshold > 0.0 && risk_threshold <= 1.0)) throw ConfigError("aeb.risk_threshold must lie in (0, 1]");
  if (!(prediction_horizon > 0.0)) throw ConfigError("aeb.prediction_horizon must be positive");
  if (!(prediction_dt > 0.0)) throw ConfigError("aeb.prediction_dt must be positive");
  if (prediction_sample_count < 1) throw ConfigError("aeb.prediction_sample_count must be >= 1");
  if (brake_delay < 0.0 || sigma_growth < 0.0 || ped_radius < 0.0 || stop_margin < 0.0) {
    throw ConfigError("aeb delays, radii and margins must be non-negative");
  }
}

std::pair<double, double> EgoTrajectory::at(double tau) const {
  if (accel == 0.0 || tau <= 0.0) return {s + speed * std::max(tau, 0.0), speed};
  if (accel < 0.0) {
    const double t_stop = speed / -accel;
    if (tau >= t_stop) return {s + speed * t_stop + 0.5 * accel * t_stop * t_stop, 0.0};
    return {s + speed * tau + 0.5 * accel * tau * tau, speed + accel * tau};
  }
  const double t_cap = speed >= max_speed ? 0.0 : (max_speed - speed) / accel;
  if (tau >= t_cap) {
    return {s + speed * t_cap + 0.5 * accel * t_cap * t_cap + max_speed * (tau - t_cap), std::max(max_speed, speed)};
  }
  return {s + speed * tau + 0.5 * accel * tau * tau, speed + accel * tau};
}

double stopping_distance(double speed, const AebConfig& cfg) {
  return speed * cfg.brake_delay + speed * speed / (-2.0 * cfg.a_max);
}

double compute_ttb(const EgoTrajectory& trajectory, double collision_point_s, const AebConfig& cfg) {
  const double gap = collision_point_s - trajectory.front();
  if (gap < 0.0) throw UsageError("compute_ttb: collision point lies behind the ego front");
  const double v0 = trajectory.speed;
  if (v0 <= 0.0 && trajectory.accel <= 0.0) return kInf;

  // Overshoot of the stop point past the collision point if the brake starts at tau.
  auto overshoot = [&](double tau) {
    const auto [s, v] = trajectory.at(tau);
    return s + 0.5 * trajectory.length + stopping_distance(v, cfg) - collision_point_s;
  };

  if (trajectory.accel == 0.0) return (gap - stopping_distance(v0, cfg)) / v0;
  const double f0 = overshoot(0.0);
  if (f0 >= 0.0) return v0 > 0.0 ? -f0 / v0 : 0.0;

  double t_end;
  if (trajectory.accel < 0.0) {
    t_end = v0 / -trajectory.accel;
    if (overshoot(t_end) < 0.0) return kInf;
  } else {
    // Speeding up: the overshoot eventually grows without bound.
    t_end = 1.0;
    while (overshoot(t_end) < 0.0) t_end *= 2.0;
  }
  constexpr double kScanStep = 0.01;
  double lo = 0.0;
  double hi = t_end;
  for (double tau = kScanStep; tau < t_end; tau += kScanStep) {
    if (overshoot(tau) >= 0.0) {
      hi = tau;
      break;
    }
    lo = tau;
  }
  for (int i = 0; i < 100 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (overshoot(mid) < 0.0 ? lo : hi) = mid;
  }
  return lo;
}

Prediction predict_pedestrian(const PedTrack& track, double horizon, const AebConfig& cfg) {
  if (!(horizon > 0.0)) throw UsageError("predict_pedestrian: horizon must be positive");
  Prediction out;
  out.dt = cfg.prediction_dt;
  const auto steps = static_cast<std::size_t>(std::floor(horizon / cfg.prediction_dt + 1e-9)) + 1;
  out.times.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double tau = static_cast<double>(k) * cfg.prediction_dt;
    out.times.push_back(tau);
    out.mean.push_back({track.position.s + track.velocity.s * tau, track.position.t + track.velocity.t * tau});
    out.sigma.push_back(cfg.sigma_growth * tau);
  }

  // Halton points (bases 2, 3) with a seeded Cranley-Patterson rotation,
  // mapped to a 2D standard normal by Box-Muller.
  double shift_u = 0.0;
  double shift_v = 0.0;
  if (cfg.seed != 0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    shift_u = unit(rng);
    shift_v = unit(rng);
  }
  const auto n = static_cast<std::size_t>(cfg.prediction_sample_count);
  out.offsets.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    double u = radical_inverse(j + 1, 2) + shift_u;
    double v = radical_inverse(j + 1, 3) + shift_v;
    u -= std::floor(u);
    v -= std::floor(v);
    if (u <= 0.0) u = 0.5 / static_cast<double>(n);
    const double r = std::sqrt(-2.0 * std::log(u));
    const double phi = 2.0 * std::numbers::pi * v;
    out.offsets.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  out.weights.assign(n, 1.0 / static_cast<double>(n));
  return out;
}

double collision_probability(const Prediction& prediction, const EgoTrajectory& trajectory) {
  std::vector<Rect> footprints;
  footprints.reserve(prediction.steps());
  for (double tau : prediction.times) {
    footprints.push_back(Rect::centered({trajectory.at(tau).first, trajectory.t}, trajectory.length, trajectory.width));
  }
  double p = 0.0;
  for (std::size_t j = 0; j < prediction.sample_count(); ++j) {
    for (std::size_t k = 0; k < prediction.steps(); ++k) {
      if (footprints[k].contains(prediction.sample(j, k))) {
        p += prediction.weights[j];
        break;
      }
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

double risk_metric(double ttb_used, double ttc) {
  if (!(ttc < kInf)) return 0.0;
  if (ttc <= 0.0) return 1.0;
  return std::clamp(std::min(ttb_used / ttc, 1.0), 0.0, 1.0);
}

bool should_brake(double p_c, double risk, const AebConfig& cfg) {
  return p_c > cfg.p_c_threshold && risk > cfg.risk_threshold;
}

AebDecision assess_pedestrian(const PedTrack& track, const EgoTrajectory& trajectory, const AebConfig& cfg) {
  AebDecision d;
  d.track_id = track.id;
  const Prediction prediction = predict_pedestrian(track, cfg.prediction_horizon, cfg);
  d.p_c = collision_probability(prediction, trajectory);
  if (!(d.p_c > cfg.p_c_threshold)) return d;

  // Conflict point: predicted mean at the time of minimum separation.
  std::size_t best = 0;
  double best_distance = kInf;
  for (std::size_t k = 0; k < prediction.steps(); ++k) {
    const Rect fp = Rect::centered({trajectory.at(prediction.times[k]).first, trajectory.t}, trajectory.length,
                                   trajectory.width);
    const double dist = distance_to_rect(prediction.mean[k], fp);
    if (dist < best_distance) {
      best_distance = dist;
      best = k;
    }
  }
  const double conflict_s = prediction.mean[best].s - cfg.ped_radius - cfg.stop_margin;
  const double gap = conflict_s - trajectory.front();
  if (gap <= 0.0) {
    d.ttc = 0.0;
    d.ttb = -kInf;
    d.ttb_used = kInf;
  } else {
    d.ttc = trajectory.speed > 0.0 ? gap / trajectory.speed : kInf;
    d.ttb = compute_ttb(trajectory, conflict_s, cfg);
    d.ttb_used = d.ttc - d.ttb;
  }
  d.risk = risk_metric(d.ttb_used, d.ttc);
  d.brake = should_brake(d.p_c, d.risk, cfg);
  return d;
}

AebDecision aeb_step(std::span<const PedTrack> tracks, const EgoTrajectory& trajectory, const AebConfig& cfg) {
  AebDecision worst;
  bool any = false;
  for (const PedTrack& track : tracks) {
    const AebDecision d = assess_pedestrian(track, trajectory, cfg);
    if (!any || more_critical(d, worst)) worst = d;
    any = true;
  }
  return worst;
}

}  // namespace pedplan::aeb
