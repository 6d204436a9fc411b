#pragma once

// Scalar special functions: the Macdonald function K0 with its derivative, and
// the recessive parabolic cylinder (Weber) function U(a, z).

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dll/errors.hpp"

namespace dll {

struct EvalResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
};

namespace detail {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kUnderflow = std::numeric_limits<double>::min();
constexpr double kEulerGamma = std::numbers::egamma;

struct BesselK01 {
  double k0, k0_err;
  double k1, k1_err;
};

// Power series around t = 0, used for t < 2.
inline BesselK01 bessel_k01_series(double t) {
  const double q = 0.25 * t * t;
  const double log_half = std::log(0.5 * t);

  // c0 = q^k / (k!)^2, c1 = q^k / (k! (k+1)!)
  double c0 = 1.0, c1 = 1.0;
  double harmonic = 0.0;  // H_k
  double i0 = 1.0, s0 = 0.0;
  double i1 = 1.0;  // I1 = (t/2) * i1
  double s1 = -2.0 * kEulerGamma + 1.0;  // psi(1) + psi(2)
  double s0_abs = 0.0, s1_abs = std::abs(s1);
  for (int k = 1; k < 60; ++k) {
    c0 *= q / (double(k) * k);
    c1 *= q / (double(k) * (k + 1));
    harmonic += 1.0 / k;
    const double h_next = harmonic + 1.0 / (k + 1);
    i0 += c0;
    i1 += c1;
    s0 += harmonic * c0;
    s0_abs += std::abs(harmonic * c0);
    const double d1 = (-2.0 * kEulerGamma + harmonic + h_next) * c1;
    s1 += d1;
    s1_abs += std::abs(d1);
    if (c0 < 1e-18 * i0 && c1 < 1e-18 * i1) break;
  }
  BesselK01 r{};
  const double lg = log_half + kEulerGamma;
  r.k0 = -lg * i0 + s0;
  r.k0_err = 4.0 * kEps * (std::abs(lg) * i0 + s0_abs + std::abs(r.k0));
  const double big_i1 = 0.5 * t * i1;
  r.k1 = 1.0 / t + log_half * big_i1 - 0.25 * t * s1;
  r.k1_err = 4.0 * kEps * (1.0 / t + std::abs(log_half) * big_i1 + 0.25 * t * s1_abs);
  return r;
}

// Steed's continued fraction (Temme's CF2) for t >= 2.
inline BesselK01 bessel_k01_cf(double t) {
  double b = 2.0 * (1.0 + t);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  double q = a1, c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  int i = 2;
  for (; i < 10000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < 0.5 * kEps) break;
  }
  BesselK01 r{};
  // log form keeps the result representable down to the underflow threshold
  const double log_k0 = -t + 0.5 * std::log(std::numbers::pi / (2.0 * t)) - std::log(s);
  const double ratio = (t + 0.5 - a1 * h) / t;
  r.k0 = std::exp(log_k0);
  r.k1 = r.k0 * ratio;
  const double rel = (8.0 + 0.05 * i) * kEps;
  r.k0_err = rel * r.k0;
  r.k1_err = rel * r.k1;
  if (r.k0 < kUnderflow) {
    r.k0 = 0.0;
    r.k0_err = kUnderflow;
  }
  if (r.k1 < kUnderflow) {
    r.k1 = 0.0;
    r.k1_err = kUnderflow;
  }
  return r;
}

inline BesselK01 bessel_k01(double t, const char* where) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    fail(ErrorKind::domain, where, "argument must be a finite positive real, got " + std::to_string(t));
  }
  constexpr double kCrossover = 2.0;
  return t < kCrossover ? bessel_k01_series(t) : bessel_k01_cf(t);
}

}  // namespace detail

/// Macdonald function K0(t), t > 0.
inline EvalResult macdonald_k0(double t) {
  const auto r = detail::bessel_k01(t, "macdonald_k0");
  return {r.k0, r.k0_err};
}

/// K0'(t) = -K1(t); negative for all t > 0.
inline EvalResult macdonald_k0_prime(double t) {
  const auto r = detail::bessel_k01(t, "macdonald_k0_prime");
  return {-r.k1, r.k1_err};
}

// ---------------------------------------------------------------------------
// Parabolic cylinder function U(a, z)
// ---------------------------------------------------------------------------

/// Working range of the Weber function evaluator.
inline constexpr double kWeberMaxAbsA = 200.0;
inline constexpr double kWeberMaxAbsZ = 200.0;

struct WeberResult {
  double u = 0.0;
  double du = 0.0;  // dU/dz
  double abs_error_u = 0.0;
  double abs_error_du = 0.0;
};

namespace detail {

// U and U' stored as mantissas with a common exponent: U = y * exp(log_scale).
struct ScaledWeber {
  double y = 0.0;
  double dy = 0.0;
  double log_scale = 0.0;
  double rel_error = 0.0;  // relative to the state norm |y| + |dy| / sqrt(1 + |Q|)
};

// Large-z asymptotic series, exact for a + 1/2 in {0, -1, -2, ...}.
// Returns false if the series has not converged to double precision at z.
inline bool weber_asymptotic(double a, double z, ScaledWeber& out) {
  const double two_z2 = 2.0 * z * z;
  double term = 1.0, sum = 1.0, dsum = 0.0;
  double prev_abs = 1.0;
  bool converged = false;
  for (int s = 1; s < 80; ++s) {
    const double p = a + 0.5 + 2.0 * s - 2.0;
    term *= -(p * (p + 1.0)) / (s * two_z2);
    if (term == 0.0) {
      converged = true;
      break;
    }
    const double abs_term = std::abs(term);
    if (abs_term > prev_abs) return false;  // diverging before convergence
    prev_abs = abs_term;
    sum += term;
    dsum += term * (-2.0 * s) / z;
    if (abs_term < 1e-17 * std::abs(sum)) {
      converged = true;
      break;
    }
  }
  if (!converged) return false;
  out.log_scale = -0.25 * z * z + (-a - 0.5) * std::log(z);
  out.y = sum;
  out.dy = sum * (-0.5 * z - (a + 0.5) / z) + dsum;
  out.rel_error = 4.0 * kEps;
  return true;
}

// One Taylor step of y'' = (z^2/4 + a) y from z0 to z0 + t.
inline void weber_taylor_step(double a, double z0, double t, ScaledWeber& st) {
  constexpr int kMaxTerms = 160;
  double c[kMaxTerms];
  c[0] = st.y;
  c[1] = st.dy;
  const double q0 = a + 0.25 * z0 * z0;
  double y = c[0] + c[1] * t;
  double dy = c[1];
  double abs_y = std::abs(c[0]) + std::abs(c[1] * t);
  double abs_dy = std::abs(c[1]);
  double tp = t;  // t^(k-1) for the derivative sum
  int small_run = 0;
  int k = 2;
  for (; k < kMaxTerms; ++k) {
    double rhs = q0 * c[k - 2];
    if (k >= 3) rhs += 0.5 * z0 * c[k - 3];
    if (k >= 4) rhs += 0.25 * c[k - 4];
    c[k] = rhs / (double(k) * (k - 1));
    const double dterm = k * c[k] * tp;
    tp *= t;
    const double term = c[k] * tp;
    y += term;
    dy += dterm;
    abs_y += std::abs(term);
    abs_dy += std::abs(dterm);
    if (std::abs(term) <= 1e-18 * (std::abs(y) + 1e-300) &&
        std::abs(dterm) <= 1e-18 * (std::abs(dy) + std::abs(y))) {
      if (++small_run >= 3) break;
    } else {
      small_run = 0;
    }
  }
  const double scale = std::sqrt(1.0 + std::abs(a + 0.25 * (z0 + t) * (z0 + t)));
  const double norm_new = std::abs(y) + std::abs(dy) / scale;
  const double rounding = 2.0 * kEps * (abs_y + abs_dy / scale);
  st.rel_error += rounding / (norm_new + 1e-300) + (k >= kMaxTerms ? 1e-14 : 0.0);
  st.y = y;
  st.dy = dy;
  const double m = std::max(std::abs(y), std::abs(dy));
  if (m > 0.0) {
    st.y /= m;
    st.dy /= m;
    st.log_scale += std::log(m);
  }
}

inline ScaledWeber weber_scaled(double a, double z, const char* where) {
  if (!std::isfinite(a) || !std::isfinite(z) || std::abs(a) > kWeberMaxAbsA ||
      std::abs(z) > kWeberMaxAbsZ) {
    fail(ErrorKind::range, where,
         "(a, z) = (" + std::to_string(a) + ", " + std::to_string(z) + ") outside |a|, |z| <= 200");
  }
  double z_start = std::max({30.0, 2.0 * std::sqrt(std::abs(a)) + 10.0, z});
  ScaledWeber st;
  while (!weber_asymptotic(a, z_start, st)) {
    z_start *= 1.25;
    if (z_start > 1e4) fail(ErrorKind::accuracy, where, "asymptotic seed did not converge");
  }
  double zc = z_start;
  while (zc > z) {
    const double q = std::abs(a + 0.25 * zc * zc);
    const double h = std::min({1.0, 4.0 / std::sqrt(q + 1.0), zc - z});
    weber_taylor_step(a, zc, -h, st);
    zc -= h;
    if (zc - z < 1e-14 * (1.0 + std::abs(z))) break;
  }
  return st;
}

inline double scaled_to_value(double mantissa, double log_scale, const char* where, bool& underflow) {
  underflow = false;
  if (mantissa == 0.0) return 0.0;
  const double lg = log_scale + std::log(std::abs(mantissa));
  if (lg > std::log(std::numeric_limits<double>::max())) {
    fail(ErrorKind::range, where, "result overflows double precision");
  }
  const double v = std::exp(lg);
  if (v < kUnderflow) {
    underflow = true;
    return 0.0;
  }
  return std::copysign(v, mantissa);
}

}  // namespace detail

/// U(a, z) together with dU/dz.
inline WeberResult parabolic_cylinder_u_with_derivative(double a, double z) {
  constexpr const char* where = "parabolic_cylinder_u";
  const auto st = detail::weber_scaled(a, z, where);
  bool uf_u = false, uf_du = false;
  WeberResult r;
  r.u = detail::scaled_to_value(st.y, st.log_scale, where, uf_u);
  r.du = detail::scaled_to_value(st.dy, st.log_scale, where, uf_du);
  const double scale = std::sqrt(1.0 + std::abs(a + 0.25 * z * z));
  const double norm = std::abs(st.y) + std::abs(st.dy) / scale;
  bool uf_norm = false;
  const double norm_value = detail::scaled_to_value(norm, st.log_scale, where, uf_norm);
  r.abs_error_u = uf_u ? detail::kUnderflow : st.rel_error * norm_value;
  r.abs_error_du = uf_du ? detail::kUnderflow : st.rel_error * norm_value * scale;
  return r;
}

/// Recessive Weber function, normalized by U(a, z) ~ exp(-z^2/4) z^(-a-1/2) as z -> +inf.
inline EvalResult parabolic_cylinder_u(double a, double z) {
  const auto r = parabolic_cylinder_u_with_derivative(a, z);
  return {r.u, r.abs_error_u};
}

}  // namespace dll
