#pragma once

// Truncated Taylor series ("jets"): c[k] = f^(k)(x0) / k!. Arithmetic on jets
// propagates exact derivatives through closed-form expressions.

#include <array>
#include <cmath>
#include <cstddef>

namespace dll {

template <int Order>
class Jet {
 public:
  static constexpr int order = Order;

  constexpr Jet() : c_{} {}
  constexpr Jet(double v) : c_{} { c_[0] = v; }  // NOLINT: implicit constants are intended

  /// The independent variable x around x0.
  static constexpr Jet variable(double x0) {
    Jet j(x0);
    if constexpr (Order >= 1) j.c_[1] = 1.0;
    return j;
  }

  constexpr double operator[](int k) const { return c_[k]; }
  constexpr double& operator[](int k) { return c_[k]; }
  constexpr double value() const { return c_[0]; }

  /// k-th derivative at x0.
  double derivative(int k) const {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= j;
    return c_[k] * f;
  }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= Order; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= Order; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k <= Order; ++k) {
      double s = 0.0;
      for (int j = 0; j <= k; ++j) s += a.c_[j] * b.c_[k - j];
      r.c_[k] = s;
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet q;
    for (int k = 0; k <= Order; ++k) {
      double s = a.c_[k];
      for (int j = 1; j <= k; ++j) s -= b.c_[j] * q.c_[k - j];
      q.c_[k] = s / b.c_[0];
    }
    return q;
  }
  friend Jet operator/(double s, const Jet& b) { return Jet(s) / b; }
  friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }

  friend Jet exp(const Jet& a) {
    Jet e;
    e.c_[0] = std::exp(a.c_[0]);
    for (int k = 1; k <= Order; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += j * a.c_[j] * e.c_[k - j];
      e.c_[k] = s / k;
    }
    return e;
  }

  friend bool isfinite(const Jet& a) {
    for (double v : a.c_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::array<double, Order + 1> c_;
};

/// Order used for test functions; bounds the almost-analytic order N by kJetOrder - 1.
inline constexpr int kJetOrder = 12;
using TaylorJet = Jet<kJetOrder>;

namespace mollifier {

/// exp(-1/u) for u > 0, identically 0 for u <= 0.
template <int K>
Jet<K> flat_exp(const Jet<K>& u) {
  // below u = 1/600 the value and all kept derivatives are under 1e-200
  if (!(u.value() > 1.0 / 600.0)) return Jet<K>(0.0);
  return exp(-(1.0 / u));
}

/// C-infinity step: 0 for u <= 0, 1 for u >= 1.
template <int K>
Jet<K> smoothstep(const Jet<K>& u) {
  if (!(u.value() > 0.0)) return Jet<K>(0.0);
  if (!(u.value() < 1.0)) return Jet<K>(1.0);
  const Jet<K> p = flat_exp(u);
  const Jet<K> q = flat_exp(Jet<K>(1.0) - u);
  return p / (p + q);
}

inline double smoothstep(double u) { return smoothstep(Jet<0>(u)).value(); }

}  // namespace mollifier

}  // namespace dll
