#include "model/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace pedplan {

bool segment_intersects(Vec2 a, Vec2 b, const Rect& rect) {
  // Liang-Barsky clipping against the closed box.
  double lo = 0.0;
  double hi = 1.0;
  const double d[2] = {b.s - a.s, b.t - a.t};
  const double p0[2] = {a.s, a.t};
  const double mins[2] = {rect.s_min, rect.t_min};
  const double maxs[2] = {rect.s_max, rect.t_max};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (p0[axis] < mins[axis] || p0[axis] > maxs[axis]) return false;
      continue;
    }
    double t0 = (mins[axis] - p0[axis]) / d[axis];
    double t1 = (maxs[axis] - p0[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return false;
  }
  return true;
}

double distance_to_rect(Vec2 p, const Rect& rect) {
  const double ds = std::max({rect.s_min - p.s, 0.0, p.s - rect.s_max});
  const double dt = std::max({rect.t_min - p.t, 0.0, p.t - rect.t_max});
  return std::hypot(ds, dt);
}

OcclusionGeometry OcclusionGeometry::relative_to(double ds, double dt) const {
  OcclusionGeometry out;
  out.sensor_origin = sensor_origin;
  out.obstacles.reserve(obstacles.size());
  for (const Rect& r : obstacles) out.obstacles.push_back(r.shifted(-ds, -dt));
  return out;
}

bool occlusion_check(Vec2 ego, Vec2 target, const OcclusionGeometry& geometry) {
  const Vec2 sensor{ego.s + geometry.sensor_origin.s, ego.t + geometry.sensor_origin.t};
  for (const Rect& r : geometry.obstacles) {
    if (segment_intersects(sensor, target, r)) return false;
  }
  return true;
}

}  // namespace pedplan
