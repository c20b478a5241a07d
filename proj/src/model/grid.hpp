#pragma once

#include <array>
#include <cmath>

namespace pedplan::ped {

struct Weighted {
  int index;
  double weight;
};

/// Uniformly spaced levels from `lo` to `hi`, both endpoints included.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int levels = 2;

  double spacing() const { return (hi - lo) / (levels - 1); }
  double value(int i) const { return i == levels - 1 ? hi : lo + spacing() * i; }

  int nearest(double x) const {
    const double f = (x - lo) / spacing();
    const long i = std::lround(f);
    return i < 0 ? 0 : (i >= levels ? levels - 1 : static_cast<int>(i));
  }

  /// Linear-interpolation weights on the two levels bracketing x (x clamped
  /// to the range). The second weight is zero when x sits on a level.
  std::array<Weighted, 2> bracket(double x) const {
    if (x <= lo) return {{{0, 1.0}, {0, 0.0}}};
    if (x >= hi) return {{{levels - 1, 1.0}, {levels - 1, 0.0}}};
    const double f = (x - lo) / spacing();
    int i = static_cast<int>(std::floor(f));
    if (i >= levels - 1) i = levels - 2;
    const double frac = f - i;
    return {{{i, 1.0 - frac}, {i + 1, frac}}};
  }
};

}  // namespace pedplan::ped
