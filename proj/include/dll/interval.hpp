#pragma once

#include <algorithm>

namespace dll {

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  double mid() const noexcept { return 0.5 * (lo + hi); }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  bool contains(const Interval& o) const noexcept { return o.lo >= lo && o.hi <= hi; }
  bool overlaps(const Interval& o) const noexcept { return o.lo <= hi && o.hi >= lo; }
};

}  // namespace dll
