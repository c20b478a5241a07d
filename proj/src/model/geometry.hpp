#pragma once

#include <vector>

namespace pedplan {

/// Point in a Frenet frame: s along the road, t lateral (positive to the left).
struct Vec2 {
  double s = 0.0;
  double t = 0.0;
};

/// Closed axis-aligned rectangle in the Frenet frame.
struct Rect {
  double s_min = 0.0;
  double s_max = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;

  bool contains(Vec2 p) const { return p.s >= s_min && p.s <= s_max && p.t >= t_min && p.t <= t_max; }
  Rect shifted(double ds, double dt) const { return {s_min + ds, s_max + ds, t_min + dt, t_max + dt}; }
  static Rect centered(Vec2 center, double length, double width) {
    return {center.s - 0.5 * length, center.s + 0.5 * length, center.t - 0.5 * width,
            center.t + 0.5 * width};
  }
};

/// True if the closed segment [a, b] touches the closed rectangle.
bool segment_intersects(Vec2 a, Vec2 b, const Rect& rect);

/// Euclidean distance from `p` to the rectangle (0 inside).
double distance_to_rect(Vec2 p, const Rect& rect);

struct OcclusionGeometry {
  std::vector<Rect> obstacles;
  /// Sensor mount point relative to the ego centre.
  Vec2 sensor_origin{2.25, 0.0};

  bool empty() const { return obstacles.empty(); }
  /// The same obstacles expressed in a frame whose origin moved by (ds, dt).
  OcclusionGeometry relative_to(double ds, double dt) const;
};

/// Sight-line test: true iff the segment from the sensor to `target` misses every obstacle.
/// `ego` is the ego centre in the same frame as the obstacles.
bool occlusion_check(Vec2 ego, Vec2 target, const OcclusionGeometry& geometry);

}  // namespace pedplan
