#pragma once

// Resolvent integral kernels of the free and half-plane massless Dirac
// operators at the spectral point i*sqrt(lambda), their magnetic dressings,
// and numerical checks of the identities they satisfy.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "dll/errors.hpp"
#include "dll/quadrature.hpp"
#include "dll/specfun.hpp"

namespace dll {

using cplx = std::complex<double>;
using SpinorMatrix = Eigen::Matrix2cd;

namespace pauli {
inline SpinorMatrix identity() { return SpinorMatrix::Identity(); }
inline SpinorMatrix sigma1() {
  SpinorMatrix m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
inline SpinorMatrix sigma2() {
  SpinorMatrix m;
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}
inline SpinorMatrix sigma3() {
  SpinorMatrix m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

/// Largest singular value of a 2x2 complex matrix.
inline double spectral_norm(const SpinorMatrix& m) {
  const double fro2 = m.squaredNorm();
  const double det = std::abs(m.determinant());
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
  return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

struct PlanePoint {
  double x1 = 0.0;
  double x2 = 0.0;
};

inline PlanePoint operator-(PlanePoint a, PlanePoint b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline PlanePoint operator+(PlanePoint a, PlanePoint b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline double norm(PlanePoint p) { return std::hypot(p.x1, p.x2); }

/// Mirror image across the edge x2 = 0.
inline PlanePoint reflect(PlanePoint p) { return {p.x1, -p.x2}; }

/// sqrt(lambda) for the spectral point i*sqrt(lambda), lambda > 0.
class SpectralParameter {
 public:
  explicit SpectralParameter(double sqrt_lambda) : s_(sqrt_lambda) {
    if (!(sqrt_lambda > 0.0) || !std::isfinite(sqrt_lambda))
      fail(ErrorKind::domain, "SpectralParameter", "sqrt_lambda must be positive");
  }
  double sqrt_lambda() const noexcept { return s_; }
  double lambda() const noexcept { return s_ * s_; }

 private:
  double s_;
};

enum class KernelKind { free, edge, dressed_S, dressed_T };

/// Landau-gauge magnetic phase (y1 - x1) * y2.
inline double landau_phase_phi2(PlanePoint x, PlanePoint y) { return (y.x1 - x.x1) * y.x2; }

namespace detail {

inline void require_finite(PlanePoint p, const char* where) {
  if (!std::isfinite(p.x1) || !std::isfinite(p.x2)) fail(ErrorKind::domain, where, "non-finite point");
}

inline void require_half_plane(PlanePoint p, const char* where) {
  require_finite(p, where);
  if (p.x2 < 0.0) fail(ErrorKind::precondition, where, "point outside the half-plane x2 >= 0");
}

// Free kernel without argument validation (stencils may leave the half-plane).
inline SpinorMatrix free_kernel_raw(PlanePoint x, PlanePoint xp, double s, const char* where) {
  const PlanePoint d = x - xp;
  const double r = norm(d);
  if (!(r > 0.0)) fail(ErrorKind::precondition, where, "kernel evaluated on its diagonal singularity");
  const double t = s * r;
  const double k0 = macdonald_k0(t).value;
  const double dk0 = macdonald_k0_prime(t).value;
  const cplx diag(0.0, s * k0 / (2.0 * std::numbers::pi));
  const cplx pref(0.0, -s * dk0 / (2.0 * std::numbers::pi));
  const double u1 = d.x1 / r, u2 = d.x2 / r;
  SpinorMatrix m;
  // sigma . u = [[0, u1 - i u2], [u1 + i u2, 0]]
  m(0, 0) = diag;
  m(1, 1) = diag;
  m(0, 1) = pref * cplx(u1, -u2);
  m(1, 0) = pref * cplx(u1, u2);
  return m;
}

inline SpinorMatrix edge_kernel_raw(PlanePoint x, PlanePoint xp, double s, const char* where) {
  return free_kernel_raw(x, reflect(xp), s, where) * pauli::sigma1() + free_kernel_raw(x, xp, s, where);
}

inline cplx magnetic_phase(double b, PlanePoint x, PlanePoint xp) {
  const double ph = b * landau_phase_phi2(x, xp);
  return {std::cos(ph), std::sin(ph)};
}

}  // namespace detail

/// Kernel of (H0 - i sqrt(lambda))^{-1} on the plane.
inline SpinorMatrix free_kernel(PlanePoint x, PlanePoint xp, SpectralParameter s) {
  detail::require_finite(x, "free_kernel");
  detail::require_finite(xp, "free_kernel");
  return detail::free_kernel_raw(x, xp, s.sqrt_lambda(), "free_kernel");
}

/// Half-plane kernel with the infinite-mass boundary condition: the free
/// kernel plus its mirror image at (xp1, -xp2) multiplied by sigma1.
inline SpinorMatrix edge_kernel_b0(PlanePoint x, PlanePoint xp, SpectralParameter s) {
  detail::require_half_plane(x, "edge_kernel_b0");
  detail::require_half_plane(xp, "edge_kernel_b0");
  return detail::edge_kernel_raw(x, xp, s.sqrt_lambda(), "edge_kernel_b0");
}

inline SpinorMatrix dressed_S_kernel(double b, PlanePoint x, PlanePoint xp, SpectralParameter s) {
  require(b >= 0.0 && std::isfinite(b), "dressed_S_kernel", "b must be a finite non-negative real");
  return detail::magnetic_phase(b, x, xp) * edge_kernel_b0(x, xp, s);
}

/// exp(i b phi2) (-b A(x - xp) . sigma) K^E with A(v) = (-v2, 0).
inline SpinorMatrix dressed_T_kernel(double b, PlanePoint x, PlanePoint xp, SpectralParameter s) {
  require(b >= 0.0 && std::isfinite(b), "dressed_T_kernel", "b must be a finite non-negative real");
  const SpinorMatrix ke = edge_kernel_b0(x, xp, s);
  // -b A(x - xp) . sigma = b (x2 - xp2) sigma1
  const double coeff = b * (x.x2 - xp.x2);
  return detail::magnetic_phase(b, x, xp) * coeff * (pauli::sigma1() * ke);
}

inline SpinorMatrix evaluate_kernel(KernelKind kind, double b, PlanePoint x, PlanePoint xp,
                                    SpectralParameter s) {
  switch (kind) {
    case KernelKind::free: return free_kernel(x, xp, s);
    case KernelKind::edge: return edge_kernel_b0(x, xp, s);
    case KernelKind::dressed_S: return dressed_S_kernel(b, x, xp, s);
    case KernelKind::dressed_T: return dressed_T_kernel(b, x, xp, s);
  }
  return SpinorMatrix::Zero();
}

/// Relative residual |(-i grad_x . sigma - i sqrt(lambda)) K| / |K| (Frobenius),
/// with the gradient taken by central differences of step h.
inline double dirac_residual(KernelKind kind, PlanePoint x, PlanePoint xp, SpectralParameter s, double h) {
  constexpr const char* where = "dirac_residual";
  require(kind == KernelKind::free || kind == KernelKind::edge, where, "only the free and edge kernels");
  require(h > 0.0 && h <= 1e-3, where, "step must satisfy 0 < h <= 1e-3");
  require(norm(x - xp) >= 10.0 * h, where, "point pair closer than 10 h to the diagonal");
  if (kind == KernelKind::edge) {
    detail::require_half_plane(x, where);
    detail::require_half_plane(xp, where);
    require(norm(x - reflect(xp)) >= 10.0 * h, where, "point pair closer than 10 h to the mirror diagonal");
  }
  const double sq = s.sqrt_lambda();
  auto k = [&](PlanePoint p) {
    return kind == KernelKind::free ? detail::free_kernel_raw(p, xp, sq, where)
                                    : detail::edge_kernel_raw(p, xp, sq, where);
  };
  const SpinorMatrix d1 = (k({x.x1 + h, x.x2}) - k({x.x1 - h, x.x2})) / (2.0 * h);
  const SpinorMatrix d2 = (k({x.x1, x.x2 + h}) - k({x.x1, x.x2 - h})) / (2.0 * h);
  const SpinorMatrix k0 = k(x);
  const cplx mi(0.0, -1.0);
  const SpinorMatrix res = mi * (pauli::sigma1() * d1 + pauli::sigma2() * d2) + mi * sq * k0;
  return res.norm() / k0.norm();
}

// ---------------------------------------------------------------------------
// Schur-test proxy for the operator norms of S_b and T_b
// ---------------------------------------------------------------------------

struct SchurResult {
  double value = 0.0;          // sup over the probe grid
  double abs_error = 0.0;      // quadrature error estimate at the maximizing probe
  PlanePoint argmax{};
};

inline constexpr std::array<double, 5> kSchurProbeHeights = {0.0, 0.5, 1.0, 2.0, 5.0};
inline constexpr std::array<double, 5> kSchurProbeAbscissae = {-1.0, -0.5, 0.0, 0.5, 1.0};

/// Row integral of the pointwise kernel norm over the half-plane for one probe x,
/// in polar coordinates centred on x.
inline quad::Result<double> schur_row_integral(KernelKind kind, double b, PlanePoint x, SpectralParameter s,
                                               double radius) {
  constexpr const char* where = "schur_norm";
  const double sq = s.sqrt_lambda();
  auto pointwise = [&](PlanePoint xp) {
    const SpinorMatrix ke = detail::edge_kernel_raw(x, xp, sq, where);
    double n = spectral_norm(ke);
    if (kind == KernelKind::dressed_T) n *= b * std::abs(x.x2 - xp.x2);
    return n;
  };
  auto radial = [&](double r) {
    if (r <= 0.0) return 0.0;
    double lo = 0.0, hi = 2.0 * std::numbers::pi;
    if (r > x.x2) {
      const double a = std::asin(x.x2 / r);
      lo = -a;
      hi = std::numbers::pi + a;
    }
    auto angular = [&](double th) {
      PlanePoint xp{x.x1 + r * std::cos(th), std::max(0.0, x.x2 + r * std::sin(th))};
      return pointwise(xp);
    };
    std::vector<double> bp;
    // the mirror term peaks where xp approaches the edge below x
    if (x.x2 > 0.0 && r > x.x2) bp = {-0.5 * std::numbers::pi};
    auto inner = quad::integrate(angular, lo, hi, 0.0, 1e-10, 400, bp);
    return r * inner.value;
  };
  std::vector<double> breaks;
  for (double r = radius; r > 1e-7 * radius; r *= 0.5) breaks.push_back(r);
  if (x.x2 > 0.0 && x.x2 < radius) breaks.push_back(x.x2);
  std::sort(breaks.begin(), breaks.end());
  return quad::integrate(radial, 0.0, radius, 0.0, 1e-9, 4000, breaks);
}

/// sup over a 5x5 probe grid of  integral_E |kernel(x, xp)| dxp ; an upper proxy
/// for the operator norm of S_b (kind dressed_S) or T_b (kind dressed_T).
inline SchurResult schur_norm(KernelKind kind, double b, SpectralParameter s, double truncation_radius = -1.0) {
  constexpr const char* where = "schur_norm";
  require(kind == KernelKind::dressed_S || kind == KernelKind::dressed_T, where, "kernel must be S or T");
  require(b >= 0.0 && std::isfinite(b), where, "b must be non-negative");
  const double radius = truncation_radius > 0.0 ? truncation_radius : 40.0 / s.sqrt_lambda();

  SchurResult best;
  best.value = -1.0;
  for (double x2 : kSchurProbeHeights) {
    for (double x1 : kSchurProbeAbscissae) {
      const PlanePoint x{x1, x2};
      auto row = schur_row_integral(kind, b, x, s, radius);
      if (!row.converged)
        throw AccuracyError(where, "row integral did not converge", row.value, row.error);
      // tail beyond the truncation radius: integrand decays on the scale 1/sqrt(lambda)
      double edge_max = 0.0;
      for (int j = 0; j < 16; ++j) {
        const double th = std::numbers::pi * j / 15.0;
        const PlanePoint xp{x1 + radius * std::cos(th), x2 + radius * std::sin(th)};
        double n = spectral_norm(detail::edge_kernel_raw(x, xp, s.sqrt_lambda(), where));
        if (kind == KernelKind::dressed_T) n *= b * std::abs(x2 - xp.x2);
        edge_max = std::max(edge_max, n);
      }
      const double tail = 2.0 * std::numbers::pi * radius * edge_max / s.sqrt_lambda();
      if (row.value > 0.0 && tail > 1e-10 * row.value)
        fail(ErrorKind::precondition, where, "truncation radius too small: tail estimate " + std::to_string(tail));
      if (row.value > best.value) {
        best.value = row.value;
        best.abs_error = row.error;
        best.argmax = x;
      }
    }
  }
  return best;
}

}  // namespace dll
