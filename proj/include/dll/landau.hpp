#pragma once

// Dirac-Landau levels sgn(k) sqrt(2|k|b) and contiguous sets of them.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "dll/errors.hpp"

namespace dll {

inline double landau_level(int k, double b) {
  const double e = std::sqrt(2.0 * std::abs(k) * b);
  return k < 0 ? -e : e;
}

/// Levels with |k| <= k_max, ascending; 0 appears once.
inline std::vector<double> landau_levels(double b, int k_max) {
  require(b > 0.0 && std::isfinite(b), "landau_levels", "b must be positive");
  require(k_max >= 0, "landau_levels", "k_max must be non-negative");
  std::vector<double> out;
  out.reserve(2 * k_max + 1);
  for (int k = -k_max; k <= k_max; ++k) out.push_back(landau_level(k, b));
  return out;
}

/// Contiguous run of Landau indices k_lo..k_hi.
class SpectralIsland {
 public:
  SpectralIsland(int k_lo, int k_hi) : lo_(k_lo), hi_(k_hi) {
    if (k_hi < k_lo) fail(ErrorKind::construction, "SpectralIsland", "empty index range");
  }

  /// From an explicit list; must be contiguous after sorting, without repeats.
  static SpectralIsland from_levels(std::vector<int> ks) {
    if (ks.empty()) fail(ErrorKind::construction, "SpectralIsland", "no levels given");
    std::sort(ks.begin(), ks.end());
    for (size_t i = 1; i < ks.size(); ++i)
      if (ks[i] != ks[i - 1] + 1)
        fail(ErrorKind::construction, "SpectralIsland", "levels must be contiguous without repeats");
    return {ks.front(), ks.back()};
  }

  int k_lo() const noexcept { return lo_; }
  int k_hi() const noexcept { return hi_; }
  int size() const noexcept { return hi_ - lo_ + 1; }
  bool contains(int k) const noexcept { return k >= lo_ && k <= hi_; }

  std::vector<int> levels() const {
    std::vector<int> v;
    for (int k = lo_; k <= hi_; ++k) v.push_back(k);
    return v;
  }

  std::string to_string() const {
    std::string s = "{";
    for (int k = lo_; k <= hi_; ++k) s += (k == lo_ ? "" : ",") + std::to_string(k);
    return s + "}";
  }

 private:
  int lo_, hi_;
};

}  // namespace dll
