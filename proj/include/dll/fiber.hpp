#pragma once

// The edge fiber operator h(xi) = -i d/dx sigma2 + (b x + xi) sigma1 on [0, inf)
// with psi1(0) = psi2(0). In components, with W = b x + xi:
//   lambda psi1 = -psi2' + W psi2,   lambda psi2 = psi1' + W psi1.

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dll/errors.hpp"
#include "dll/interval.hpp"
#include "dll/landau.hpp"
#include "dll/parallel.hpp"
#include "dll/specfun.hpp"

namespace dll {

struct FiberProblem {
  double b = 1.0;
  double xi = 0.0;

  void validate(const char* where) const {
    if (!(b > 0.0) || !std::isfinite(b)) fail(ErrorKind::domain, where, "b must be a finite positive real");
    if (!std::isfinite(xi)) fail(ErrorKind::domain, where, "xi must be finite");
  }
  double potential(double x) const { return b * x + xi; }
};

enum class FiberScheme {
  staggered_first_order,  // first-order system on a staggered grid; default
  susy_second_order       // -u'' + (W^2 - b) u = lambda^2 u by finite-difference shooting
};

inline const char* to_string(FiberScheme s) {
  return s == FiberScheme::staggered_first_order ? "staggered_first_order" : "susy_second_order";
}

/// Box [0, x_max] with n cells (n even; also the eigenfunction sample count).
struct GridSpec {
  double x_max = 0.0;
  int n = 0;
  FiberScheme scheme = FiberScheme::staggered_first_order;

  /// Smallest admissible box for eigenvalues up to lambda_max in magnitude.
  static double min_box(const FiberProblem& p, double lambda_max) {
    return (std::abs(p.xi) + 2.0 * std::sqrt(lambda_max * lambda_max + p.b)) / p.b + 6.0 / std::sqrt(p.b);
  }

  /// Default grid: the minimal box, and about 96 cells per unit of the largest local wavenumber.
  static GridSpec for_problem(const FiberProblem& p, double lambda_max,
                              FiberScheme scheme = FiberScheme::staggered_first_order) {
    p.validate("GridSpec::for_problem");
    GridSpec g;
    g.x_max = min_box(p, lambda_max);
    const double k = std::max({1.0, std::sqrt(p.b), std::abs(lambda_max)});
    const int cells = static_cast<int>(std::ceil(96.0 * g.x_max * k));
    g.n = std::max(64, cells + (cells % 2));
    g.scheme = scheme;
    return g;
  }

  void validate(const FiberProblem& p, double lambda_max, const char* where) const {
    if (n < 64 || n % 2 != 0) fail(ErrorKind::precondition, where, "grid needs an even n >= 64");
    if (!(x_max >= min_box(p, lambda_max) * (1.0 - 1e-12)))
      fail(ErrorKind::precondition, where,
           "x_max = " + std::to_string(x_max) + " below the decay margin " + std::to_string(min_box(p, lambda_max)));
  }
};

/// A solved eigenvalue with its eigenfunction sampled at x_i = i x_max / n.
struct EdgeEigenpair {
  FiberProblem problem;
  double lambda = 0.0;       // shooting-polished eigenvalue
  double lambda_grid = 0.0;  // extrapolated grid eigenvalue it was polished from
  double x_max = 0.0;
  std::vector<double> psi1, psi2;
  double bc_residual = 0.0;
  double ode_residual = 0.0;
  double norm = 0.0;
  double boundary_mass = 0.0;  // estimated L2 mass beyond x_max

  double dx() const { return x_max / static_cast<double>(psi1.size() - 1); }
};

// ---------------------------------------------------------------------------
// Symmetric tridiagonal eigenvalues
// ---------------------------------------------------------------------------

struct SymTridiagonal {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;  // size n - 1

  Eigen::Index size() const { return diag.size(); }
  Eigen::MatrixXd dense() const {
    const Eigen::Index n = size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = diag[i];
    for (Eigen::Index i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = off[i];
    return m;
  }
};

namespace detail {

// Eigenvalues in [lo, hi) by bisection, ascending.
inline std::vector<double> tridiag_eigenvalues(const SymTridiagonal& t, double lo, double hi) {
  const lapack_int n = static_cast<lapack_int>(t.size());
  std::vector<double> d(t.diag.data(), t.diag.data() + n);
  std::vector<double> e(t.off.data(), t.off.data() + std::max<lapack_int>(n - 1, 0));
  std::vector<double> w(n);
  std::vector<lapack_int> iblock(n), isplit(n);
  lapack_int m = 0, nsplit = 0;
  const lapack_int info = LAPACKE_dstebz('V', 'E', n, lo, hi, 0, 0, 0.0, d.data(), e.data(), &m, &nsplit, w.data(),
                                         iblock.data(), isplit.data());
  if (info != 0) fail(ErrorKind::accuracy, "tridiag_eigenvalues", "LAPACK dstebz failed, info " + std::to_string(info));
  w.resize(m);
  return w;
}

// Eigenvalues with (1-based) indices il..iu, ascending.
inline std::vector<double> tridiag_eigenvalues_index(const SymTridiagonal& t, int il, int iu) {
  const lapack_int n = static_cast<lapack_int>(t.size());
  std::vector<double> d(t.diag.data(), t.diag.data() + n);
  std::vector<double> e(t.off.data(), t.off.data() + std::max<lapack_int>(n - 1, 0));
  std::vector<double> w(n);
  std::vector<lapack_int> iblock(n), isplit(n);
  lapack_int m = 0, nsplit = 0;
  const lapack_int info = LAPACKE_dstebz('I', 'E', n, 0.0, 0.0, il, iu, 0.0, d.data(), e.data(), &m, &nsplit,
                                         w.data(), iblock.data(), isplit.data());
  if (info != 0) fail(ErrorKind::accuracy, "tridiag_eigenvalues", "LAPACK dstebz failed, info " + std::to_string(info));
  w.resize(m);
  return w;
}

// Number of eigenvalues below sigma (Sturm count of LDL^T pivots).
inline int sturm_count(const SymTridiagonal& t, double sigma) {
  int count = 0;
  double piv = 1.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double e2 = i > 0 ? t.off[i - 1] * t.off[i - 1] : 0.0;
    piv = (t.diag[i] - sigma) - (i > 0 ? e2 / piv : 0.0);
    if (piv == 0.0) piv = -1e-300;
    if (piv < 0.0) ++count;
  }
  return count;
}

}  // namespace detail

/// Staggered discretization with m integer cells: unknowns psi1(0), psi2(h/2),
/// psi1(h), ..., psi1(m h), h = x_max / (m + 1/2), and psi2 = 0 at the wall
/// x = x_max. Returned in symmetrized form M^{-1/2} K M^{-1/2}.
inline SymTridiagonal fiber_matrix(const FiberProblem& p, double x_max, int m) {
  p.validate("fiber_matrix");
  require(m >= 1 && x_max > 0.0, "fiber_matrix", "need m >= 1 and x_max > 0");
  const double h = x_max / (m + 0.5);
  const int dim = 2 * m + 1;
  SymTridiagonal t;
  t.diag = Eigen::VectorXd::Zero(dim);
  t.off = Eigen::VectorXd::Zero(dim - 1);
  // half cell at the boundary node carries the condition psi1(0) = psi2(0)
  auto mass = [&](int i) { return i == 0 ? 0.5 * h : h; };
  t.diag[0] = 1.0 / mass(0);
  for (int j = 0; j < m; ++j) {
    const double w = p.potential((j + 0.5) * h);
    const int i1 = 2 * j, i2 = 2 * j + 1;
    t.off[i1] = (-1.0 + 0.5 * h * w) / std::sqrt(mass(i1) * mass(i2));
    t.off[i2] = (1.0 + 0.5 * h * w) / std::sqrt(mass(i2) * mass(i2 + 1));
  }
  return t;
}

namespace detail {

inline std::vector<double> nearest_pairing_extrapolate(const std::vector<double>& coarse,
                                                       const std::vector<double>& fine, double ratio,
                                                       const Interval& keep, const Interval& check, double tol,
                                                       const char* where) {
  const double r2 = ratio * ratio;
  std::vector<double> out;
  for (double f : fine) {
    auto it = std::min_element(coarse.begin(), coarse.end(),
                               [f](double a, double b) { return std::abs(a - f) < std::abs(b - f); });
    const bool paired = it != coarse.end() && std::abs(*it - f) <= 1e-2 * (1.0 + std::abs(f));
    // membership is decided on the extrapolated value; the raw grid value can sit across an edge
    if (!paired) {
      if (f < keep.lo || f > keep.hi) continue;
      fail(ErrorKind::resolution, where, "eigenvalue " + std::to_string(f) + " has no partner on the coarse grid");
    }
    const double extrap = (r2 * f - *it) / (r2 - 1.0);
    if (extrap < keep.lo || extrap > keep.hi) continue;
    if (check.contains(f) && std::abs(extrap - f) > tol)
      fail(ErrorKind::resolution, where,
           "Richardson correction " + std::to_string(std::abs(extrap - f)) + " at lambda = " + std::to_string(f) +
               " exceeds tolerance");
    out.push_back(extrap);
  }
  return out;
}

// Finite-difference shooting for u = psi1 of -u'' + (W^2 - b) u = lambda^2 u,
// marched inward from u(x_max) = 0; returns the normalized boundary defect
// (lambda - xi) u(0) - u'(0).
inline double susy_defect(const FiberProblem& p, double lambda, double x_max, int cells) {
  const double h = x_max / cells;
  const double mu = lambda * lambda + p.b;
  double u2 = 0.0, u1 = 1.0, u0 = 0.0;  // u(j+2), u(j+1), u(j) with j descending
  for (int j = cells - 2; j >= 0; --j) {
    const double w = p.potential((j + 1) * h);
    u0 = (2.0 + h * h * (w * w - mu)) * u1 - u2;
    if (j > 0) {
      u2 = u1;
      u1 = u0;
      const double s = std::abs(u1) + std::abs(u2);
      if (s > 1e100) {
        u1 /= s;
        u2 /= s;
      }
    }
  }
  const double du0 = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * h);
  return ((lambda - p.xi) * u0 - du0) / std::hypot(u0, u1);
}

inline std::vector<double> susy_roots(const FiberProblem& p, Interval window, double x_max, int cells) {
  std::vector<double> roots;
  const double step = 0.01 * std::min(1.0, std::sqrt(p.b));
  auto f = [&](double l) { return susy_defect(p, l, x_max, cells); };
  auto scan = [&](double lo, double hi) {
    if (!(hi > lo)) return;
    const int k = std::max(2, static_cast<int>(std::ceil((hi - lo) / step)));
    double a = lo, fa = f(a);
    for (int i = 1; i <= k; ++i) {
      const double bnd = lo + (hi - lo) * i / k;
      const double fb = f(bnd);
      if (fa == 0.0) roots.push_back(a);
      else if (fa * fb < 0.0) {
        std::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(f, a, bnd, fa, fb, boost::math::tools::eps_tolerance<double>(50),
                                                   iters);
        roots.push_back(0.5 * (r.first + r.second));
      }
      a = bnd;
      fa = fb;
    }
  };
  constexpr double kZeroGap = 1e-4;
  scan(window.lo, std::min(window.hi, -kZeroGap));
  scan(std::max(window.lo, kZeroGap), window.hi);
  return roots;
}

}  // namespace detail

/// Tolerance on the Richardson correction of a grid eigenvalue.
inline constexpr double kRichardsonTolerance = 1e-5;

/// Grid eigenvalues in `window`, Richardson-extrapolated from n and 2n cells.
/// The resolution check applies inside `check` (default: the whole window).
/// The susy scheme excludes |lambda| < 1e-4.
inline std::vector<double> fiber_grid_eigenvalues(const FiberProblem& p, const GridSpec& g, Interval window,
                                                  std::optional<Interval> check = std::nullopt) {
  constexpr const char* where = "fiber_grid_eigenvalues";
  p.validate(where);
  const Interval checked = check.value_or(window);
  const double lmax = std::max(std::abs(checked.lo), std::abs(checked.hi));
  g.validate(p, lmax, where);
  const double pad = 1e-2 * (1.0 + lmax);
  const Interval wide{window.lo - pad, window.hi + pad};
  if (g.scheme == FiberScheme::staggered_first_order) {
    const auto coarse = detail::tridiag_eigenvalues(fiber_matrix(p, g.x_max, g.n), wide.lo, wide.hi);
    const auto fine = detail::tridiag_eigenvalues(fiber_matrix(p, g.x_max, 2 * g.n), wide.lo, wide.hi);
    const double ratio = (2.0 * g.n + 0.5) / (g.n + 0.5);
    return detail::nearest_pairing_extrapolate(coarse, fine, ratio, window, checked,
                                               kRichardsonTolerance, where);
  }
  // errors in lambda^2 are divided by 2 lambda, so small eigenvalues need a finer grid
  const auto coarse = detail::susy_roots(p, wide, g.x_max, 4 * g.n);
  const auto fine = detail::susy_roots(p, wide, g.x_max, 8 * g.n);
  return detail::nearest_pairing_extrapolate(coarse, fine, 2.0, window, checked, kRichardsonTolerance, where);
}

// ---------------------------------------------------------------------------
// Shooting: Taylor integration of the first-order system from x_max inward
// ---------------------------------------------------------------------------

namespace detail {

struct FiberState {
  double p = 0.0, q = 0.0;  // psi1, psi2 mantissas
  double log_scale = 0.0;
};

// Exact Taylor step of the linear system from x0 to x0 + t.
inline void fiber_taylor_step(const FiberProblem& pr, double lambda, double x0, double t, FiberState& s) {
  constexpr int kMax = 200;
  const double w0 = pr.potential(x0), b = pr.b;
  double pk_1 = 0.0, qk_1 = 0.0;  // order k-1 coefficients
  double pk = s.p, qk = s.q;
  double sum_p = pk, sum_q = qk, tp = 1.0;
  int small = 0;
  for (int k = 0; k < kMax; ++k) {
    const double pn = (lambda * qk - w0 * pk - b * pk_1) / (k + 1);
    const double qn = (w0 * qk + b * qk_1 - lambda * pk) / (k + 1);
    pk_1 = pk;
    qk_1 = qk;
    pk = pn;
    qk = qn;
    tp *= t;
    const double dp = pk * tp, dq = qk * tp;
    sum_p += dp;
    sum_q += dq;
    if (std::abs(dp) + std::abs(dq) <= 1e-18 * (std::abs(sum_p) + std::abs(sum_q))) {
      if (++small >= 3) break;
    } else {
      small = 0;
    }
  }
  const double m = std::max(std::abs(sum_p), std::abs(sum_q));
  s.p = sum_p / m;
  s.q = sum_q / m;
  s.log_scale += std::log(m);
}

inline double fiber_step_size(const FiberProblem& pr, double lambda, double x) {
  const double w = pr.potential(x);
  return 1.5 / std::sqrt(w * w + lambda * lambda + pr.b + 1.0);
}

inline FiberState fiber_seed(const FiberProblem& pr, double lambda, double x_max, const char* where) {
  const double w = pr.potential(x_max);
  if (!(w > std::abs(lambda)))
    fail(ErrorKind::truncation, where, "box end is not in the classically forbidden region");
  const double kappa = std::sqrt(w * w - lambda * lambda);
  return {1.0, lambda / (w + kappa), 0.0};
}

inline void fiber_integrate(const FiberProblem& pr, double lambda, double from, double to, FiberState& s) {
  const double dir = to >= from ? 1.0 : -1.0;
  double x = from;
  while (dir * (to - x) > 0.0) {
    const double h = std::min(dir * (to - x), fiber_step_size(pr, lambda, x));
    fiber_taylor_step(pr, lambda, x, dir * h, s);
    x += dir * h;
    if (dir * (to - x) < 1e-14 * (1.0 + std::abs(to))) x = to;
  }
}

// Sample index of the matching point: the bottom of the well W = 0, clamped to the box.
inline int matching_index(const FiberProblem& pr, double x_max, int n) {
  const double xc = std::clamp(-pr.xi / pr.b, 0.0, x_max);
  return std::clamp(static_cast<int>(std::lround(xc / x_max * n)), 0, n);
}

// Two-sided shooting: the solution obeying psi1(0) = psi2(0), integrated
// outward, against the decaying solution, integrated inward; both directions
// are stable. Returns their normalized Wronskian at x_match.
inline double fiber_shoot_defect(const FiberProblem& pr, double lambda, double x_max, double x_match) {
  FiberState left{1.0, 1.0, 0.0};
  fiber_integrate(pr, lambda, 0.0, x_match, left);
  FiberState right = fiber_seed(pr, lambda, x_max, "fiber_shoot");
  fiber_integrate(pr, lambda, x_max, x_match, right);
  return (left.p * right.q - left.q * right.p) / (std::hypot(left.p, left.q) * std::hypot(right.p, right.q));
}

// Eigenvalue of the ODE problem next to a grid estimate, to full precision.
inline double polish_eigenvalue(const FiberProblem& pr, double lambda_grid, double x_max, double x_match,
                                const char* where) {
  auto f = [&](double l) { return fiber_shoot_defect(pr, l, x_max, x_match); };
  const double f0 = f(lambda_grid);
  if (f0 == 0.0) return lambda_grid;
  for (double d = 1e-9 * (1.0 + std::abs(lambda_grid)); d < 2e-4 * (1.0 + std::abs(lambda_grid)); d *= 4.0) {
    for (double sgn : {1.0, -1.0}) {
      const double l = lambda_grid + sgn * d;
      const double fl = f(l);
      if (fl * f0 <= 0.0) {
        double a = std::min(l, lambda_grid), b = std::max(l, lambda_grid);
        double fa = a == l ? fl : f0, fb = b == l ? fl : f0;
        if (fa == 0.0) return a;
        if (fb == 0.0) return b;
        std::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52),
                                                   iters);
        return 0.5 * (r.first + r.second);
      }
    }
  }
  fail(ErrorKind::consistency, where,
       "no shooting eigenvalue within 2e-4 of the grid eigenvalue " + std::to_string(lambda_grid));
}

// 4th-order central first derivative on a uniform grid, one-sided near the ends.
inline std::vector<double> derivative4(const std::vector<double>& y, double h) {
  const int n = static_cast<int>(y.size());
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) {
    if (i >= 2 && i + 2 < n) {
      d[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
    } else if (i < 2) {
      d[i] = (-25.0 * y[i] + 48.0 * y[i + 1] - 36.0 * y[i + 2] + 16.0 * y[i + 3] - 3.0 * y[i + 4]) / (12.0 * h);
    } else {
      d[i] = (25.0 * y[i] - 48.0 * y[i - 1] + 36.0 * y[i - 2] - 16.0 * y[i - 3] + 3.0 * y[i - 4]) / (12.0 * h);
    }
  }
  return d;
}

inline double simpson(const std::vector<double>& y, double h) {
  const size_t n = y.size() - 1;  // even
  double s = y.front() + y.back();
  for (size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
  return s * h / 3.0;
}

}  // namespace detail

/// Polishes a grid eigenvalue by shooting and samples the eigenfunction on g.
inline EdgeEigenpair make_eigenpair(const FiberProblem& p, const GridSpec& g, double lambda_grid) {
  constexpr const char* where = "make_eigenpair";
  EdgeEigenpair e;
  e.problem = p;
  e.lambda_grid = lambda_grid;
  const int n = g.n;
  const double dx = g.x_max / n;
  const int im = detail::matching_index(p, g.x_max, n);
  e.lambda = detail::polish_eigenvalue(p, lambda_grid, g.x_max, im * dx, where);
  if (std::abs(e.lambda - lambda_grid) > 1e-6)
    fail(ErrorKind::consistency, where,
         "grid eigenvalue " + std::to_string(lambda_grid) + " and shooting eigenvalue " + std::to_string(e.lambda) +
             " differ by more than 1e-6");
  e.x_max = g.x_max;

  std::vector<detail::FiberState> states(n + 1);
  detail::FiberState s{1.0, 1.0, 0.0};
  states[0] = s;
  for (int i = 1; i <= im; ++i) {
    detail::fiber_integrate(p, e.lambda, (i - 1) * dx, i * dx, s);
    states[i] = s;
  }
  const detail::FiberState left_match = s;
  s = detail::fiber_seed(p, e.lambda, g.x_max, where);
  states[n] = s;
  for (int i = n - 1; i >= im; --i) {
    detail::fiber_integrate(p, e.lambda, (i + 1) * dx, i * dx, s);
    states[i] = s;
  }
  // scale the left part onto the right one through the larger component at the match
  const bool use_p = std::abs(s.p) >= std::abs(s.q);
  const double lnum = use_p ? left_match.p : left_match.q, rnum = use_p ? s.p : s.q;
  const double shift = s.log_scale + std::log(std::abs(rnum)) - left_match.log_scale - std::log(std::abs(lnum));
  const double flip = (rnum / lnum) < 0.0 ? -1.0 : 1.0;
  for (int i = 0; i < im; ++i) {
    states[i].p *= flip;
    states[i].q *= flip;
    states[i].log_scale += shift;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& st : states) top = std::max(top, st.log_scale);
  e.psi1.resize(n + 1);
  e.psi2.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double f = std::exp(states[i].log_scale - top);
    e.psi1[i] = states[i].p * f;
    e.psi2[i] = states[i].q * f;
  }
  // mismatch of the other component at the matching point
  const double fl = std::exp(left_match.log_scale + shift - top) * flip;
  double jump = use_p ? std::abs(left_match.q * fl - e.psi2[im]) : std::abs(left_match.p * fl - e.psi1[im]);

  std::vector<double> dens(n + 1);
  for (int i = 0; i <= n; ++i) dens[i] = e.psi1[i] * e.psi1[i] + e.psi2[i] * e.psi2[i];
  const double nrm = std::sqrt(detail::simpson(dens, dx));
  int imax = 0;
  for (int i = 0; i <= n; ++i)
    if (std::abs(e.psi1[i]) > std::abs(e.psi1[imax])) imax = i;
  const double sgn = e.psi1[imax] < 0.0 ? -1.0 : 1.0;
  for (int i = 0; i <= n; ++i) {
    e.psi1[i] *= sgn / nrm;
    e.psi2[i] *= sgn / nrm;
    dens[i] /= nrm * nrm;
  }
  jump /= nrm;
  e.norm = detail::simpson(dens, dx);
  // the outward solution meets the condition exactly; the matching jump carries the defect
  e.bc_residual = std::abs(e.psi1[0] - e.psi2[0]) + jump;

  const double w_end = p.potential(g.x_max);
  const double kappa = std::sqrt(w_end * w_end - e.lambda * e.lambda);
  e.boundary_mass = dens[n] / (2.0 * kappa);
  if (e.boundary_mass > 1e-10)
    fail(ErrorKind::truncation, where, "eigenfunction mass beyond x_max is " + std::to_string(e.boundary_mass));

  const auto d1 = detail::derivative4(e.psi1, dx);
  const auto d2 = detail::derivative4(e.psi2, dx);
  double res = 0.0, amp = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = p.potential(i * dx);
    res = std::max(res, std::abs(d1[i] + w * e.psi1[i] - e.lambda * e.psi2[i]));
    res = std::max(res, std::abs(-d2[i] + w * e.psi2[i] - e.lambda * e.psi1[i]));
    amp = std::max(amp, std::max(std::abs(e.psi1[i]), std::abs(e.psi2[i])) * (1.0 + std::abs(w) + std::abs(e.lambda)));
  }
  e.ode_residual = res / amp;
  if (!(std::abs(e.norm - 1.0) <= 1e-10 && e.bc_residual <= 1e-8 && e.ode_residual <= 1e-6))
    fail(ErrorKind::invariant, where,
         "eigenpair residuals out of bounds at lambda = " + std::to_string(e.lambda) +
             " (bc " + std::to_string(e.bc_residual) + ", ode " + std::to_string(e.ode_residual) + ")");
  return e;
}

/// Eigenpairs with eigenvalue in `window`, ascending. The grid is chosen for
/// the window unless given.
inline std::vector<EdgeEigenpair> solve_fiber_window(const FiberProblem& p, Interval window,
                                                     const GridSpec* grid = nullptr) {
  const double lmax = std::max(std::abs(window.lo), std::abs(window.hi));
  const GridSpec g = grid ? *grid : GridSpec::for_problem(p, lmax);
  std::vector<EdgeEigenpair> out;
  for (double l : fiber_grid_eigenvalues(p, g, window)) {
    auto e = make_eigenpair(p, g, l);
    if (window.contains(e.lambda)) out.push_back(std::move(e));
  }
  return out;
}

/// The `count` eigenpairs of smallest |lambda|, ascending.
inline std::vector<EdgeEigenpair> solve_fiber_grid(const FiberProblem& p, const GridSpec& g, int count) {
  constexpr const char* where = "solve_fiber_grid";
  p.validate(where);
  require(count >= 1 && count <= 40, where, "count must lie in [1, 40]");
  // locate candidates on the coarse matrix by index around the Sturm split at 0
  const SymTridiagonal t = fiber_matrix(p, g.x_max, g.n);
  const int dim = static_cast<int>(t.size());
  const int below = detail::sturm_count(t, 0.0);
  const int il = std::max(1, below - count), iu = std::min(dim, below + count + 1);
  const auto all = detail::tridiag_eigenvalues_index(t, il, iu);
  std::vector<int> order(all.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(all[a]) < std::abs(all[b]); });
  if (static_cast<int>(order.size()) < count) fail(ErrorKind::resolution, where, "grid has too few eigenvalues");
  order.resize(count);
  const int first = *std::min_element(order.begin(), order.end());
  const int last = *std::max_element(order.begin(), order.end());
  const double lo = all[first], hi = all[last];
  const double lmax = std::max(std::abs(lo), std::abs(hi));
  g.validate(p, lmax, where);
  // the window edges sit halfway to the next eigenvalues, away from any eigenvalue
  const double wlo = first > 0 ? 0.5 * (all[first - 1] + lo) : lo - 0.5;
  const double whi = last + 1 < static_cast<int>(all.size()) ? 0.5 * (all[last + 1] + hi) : hi + 0.5;
  GridSpec gs = g;
  gs.scheme = FiberScheme::staggered_first_order;
  auto pairs = solve_fiber_window(p, {wlo, whi}, &gs);
  std::sort(pairs.begin(), pairs.end(),
            [](const EdgeEigenpair& a, const EdgeEigenpair& b) { return std::abs(a.lambda) < std::abs(b.lambda); });
  if (static_cast<int>(pairs.size()) < count)
    fail(ErrorKind::resolution, where, "refined grid lost an eigenvalue");
  pairs.resize(count);
  std::sort(pairs.begin(), pairs.end(),
            [](const EdgeEigenpair& a, const EdgeEigenpair& b) { return a.lambda < b.lambda; });
  return pairs;
}

/// As above with the default grid; the box is enlarged until it covers the result.
inline std::vector<EdgeEigenpair> solve_fiber_grid(const FiberProblem& p, int count) {
  p.validate("solve_fiber_grid");
  double lmax = std::sqrt(std::max(p.xi, 0.0) * std::max(p.xi, 0.0) + 2.0 * p.b * (count + 1)) + std::sqrt(p.b);
  for (int attempt = 0; attempt < 6; ++attempt) {
    const GridSpec g = GridSpec::for_problem(p, lmax);
    auto t = fiber_matrix(p, g.x_max, g.n);
    const int below = detail::sturm_count(t, 0.0);
    const int dim = static_cast<int>(t.size());
    auto cand = detail::tridiag_eigenvalues_index(t, std::max(1, below - count + 1), std::min(dim, below + count));
    std::sort(cand.begin(), cand.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    const double need = std::abs(cand[std::min<size_t>(count, cand.size()) - 1]) + 0.6;
    if (need <= lmax) return solve_fiber_grid(p, g, count);
    lmax = need * 1.2;
  }
  fail(ErrorKind::truncation, "solve_fiber_grid", "could not size the box");
}

// ---------------------------------------------------------------------------
// Secular function in parabolic cylinder functions
// ---------------------------------------------------------------------------

/// F(lambda) = U(a, z0) - lambda / sqrt(2b) U(a + 1, z0), a = -(lambda^2 + b)/(2b),
/// z0 = xi sqrt(2/b). Its zeros are the fiber eigenvalues.
inline double secular_function(const FiberProblem& p, double lambda) {
  constexpr const char* where = "secular_function";
  p.validate(where);
  if (!(lambda != 0.0) || !std::isfinite(lambda)) fail(ErrorKind::domain, where, "lambda must be non-zero");
  const double a = -(lambda * lambda + p.b) / (2.0 * p.b);
  const double z0 = p.xi * std::sqrt(2.0 / p.b);
  const double u0 = parabolic_cylinder_u(a, z0).value;
  const double u1 = parabolic_cylinder_u(a + 1.0, z0).value;
  return u0 - lambda / std::sqrt(2.0 * p.b) * u1;
}

/// Smallest |lambda| admitted by the secular backend.
inline constexpr double kSecularZeroGap = 1e-4;

namespace detail {

inline std::vector<double> secular_scan(const FiberProblem& p, Interval w, double step) {
  std::vector<double> roots;
  // the values span many decades; scan the sign only and polish by bracketing
  auto f = [&](double l) { return secular_function(p, l); };
  if (!(w.hi > w.lo)) return roots;
  const int k = std::max(2, static_cast<int>(std::ceil((w.hi - w.lo) / step)));
  double a = w.lo, fa = f(a);
  for (int i = 1; i <= k; ++i) {
    const double bnd = w.lo + (w.hi - w.lo) * i / k;
    const double fb = f(bnd);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if (fa * fb < 0.0) {
      std::uintmax_t iters = 200;
      auto r = boost::math::tools::toms748_solve(f, a, bnd, fa, fb, boost::math::tools::eps_tolerance<double>(50),
                                                 iters);
      roots.push_back(0.5 * (r.first + r.second));
    }
    a = bnd;
    fa = fb;
  }
  return roots;
}

}  // namespace detail

/// All zeros of the secular function in `window` (split at +-1e-4 around 0),
/// cross-checked against the grid backend's count.
inline std::vector<double> solve_fiber_secular(const FiberProblem& p, Interval window) {
  constexpr const char* where = "solve_fiber_secular";
  p.validate(where);
  require(window.hi > window.lo, where, "empty window");
  std::vector<Interval> parts;
  if (window.lo < -kSecularZeroGap) parts.push_back({window.lo, std::min(window.hi, -kSecularZeroGap)});
  if (window.hi > kSecularZeroGap) parts.push_back({std::max(window.lo, kSecularZeroGap), window.hi});

  const double lmax = std::max(std::abs(window.lo), std::abs(window.hi));
  const GridSpec g = GridSpec::for_problem(p, lmax);
  std::vector<double> reference;
  for (const auto& part : parts) {
    auto v = fiber_grid_eigenvalues(p, g, part);
    reference.insert(reference.end(), v.begin(), v.end());
  }

  double step = 0.02 * std::sqrt(p.b);
  for (int attempt = 0; attempt < 3; ++attempt, step *= 0.25) {
    std::vector<double> roots;
    for (const auto& part : parts) {
      auto r = detail::secular_scan(p, part, step);
      roots.insert(roots.end(), r.begin(), r.end());
    }
    if (roots.size() == reference.size()) return roots;
  }
  fail(ErrorKind::consistency, where,
       "secular root count differs from the grid backend (" + std::to_string(reference.size()) + " expected)");
}

// ---------------------------------------------------------------------------
// Velocities and dispersion branches
// ---------------------------------------------------------------------------

/// d lambda / d xi = <psi, sigma1 psi> = 2 int psi1 psi2.
inline double hf_velocity(const EdgeEigenpair& e) {
  std::vector<double> prod(e.psi1.size());
  for (size_t i = 0; i < prod.size(); ++i) prod[i] = 2.0 * e.psi1[i] * e.psi2[i];
  return detail::simpson(prod, e.dx());
}

struct BranchSample {
  double xi = 0.0;
  double lambda = 0.0;
  double velocity = 0.0;
  double bc_residual = 0.0;
  double ode_residual = 0.0;
};

struct DispersionBranch {
  int k = 0;
  double b = 1.0;
  std::vector<BranchSample> samples;

  double max_lambda() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) m = std::max(m, s.lambda);
    return m;
  }
};

/// Uniform sweep start, start + step, ..., up to stop.
struct XiRange {
  double start = -8.0;
  double stop = 6.0;
  double step = 0.05;

  std::vector<double> points() const {
    require(step > 0.0 && stop >= start && std::isfinite(start) && std::isfinite(stop), "XiRange",
            "need step > 0 and stop >= start");
    const long n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    std::vector<double> v;
    v.reserve(n + 1);
    for (long i = 0; i <= n; ++i) v.push_back(start + i * step);
    return v;
  }
};

/// Left sweep end required for branch |k| <= k_max: every tracked eigenfunction
/// must sit well inside the bulk there.
inline double required_sweep_start(double b, int k_max) {
  return -std::sqrt(b) * (2.0 * std::sqrt(2.0 * k_max + 1.0) + 3.0);
}

struct TraceOptions {
  int jobs = 0;
  double spacing_fraction = 0.25;  // matching tolerance relative to local level spacing
};

/// Follows branches k in k_set across the sweep by continuity from their
/// Landau-level asymptotes at the left end.
inline std::vector<DispersionBranch> trace_branches(double b, const XiRange& range, std::vector<int> k_set,
                                                    const TraceOptions& opt = {}) {
  constexpr const char* where = "trace_branches";
  require(b > 0.0 && std::isfinite(b), where, "b must be positive");
  require(!k_set.empty(), where, "empty branch set");
  std::sort(k_set.begin(), k_set.end());
  k_set.erase(std::unique(k_set.begin(), k_set.end()), k_set.end());
  int kmax = 0;
  for (int k : k_set) kmax = std::max(kmax, std::abs(k));
  const auto xs = range.points();
  require(xs.size() >= 3, where, "sweep needs at least three samples");
  require(range.start <= required_sweep_start(b, kmax) + 1e-12, where,
          "sweep must start at xi <= " + std::to_string(required_sweep_start(b, kmax)) +
              " to resolve the Landau asymptotes");
  const int nb = static_cast<int>(k_set.size());
  const double pad = 2.0 * std::sqrt(b) + 0.5;

  // eigenvalues at xi in a window; computed independently per sample
  // padding eigenvalues only serve the spacing estimate and are not resolution-checked
  auto values_at = [&](double xi, Interval w) {
    const FiberProblem p{b, xi};
    const Interval tracked{w.lo + pad, w.hi - pad};
    const double lmax = std::max(std::abs(tracked.lo), std::abs(tracked.hi));
    return fiber_grid_eigenvalues(p, GridSpec::for_problem(p, lmax), w, tracked);
  };

  std::vector<std::vector<double>> lam(nb, std::vector<double>(xs.size()));

  // label the left end by the nearest Landau level
  {
    const int klo = k_set.front(), khi = k_set.back();
    const Interval w{landau_level(klo, b) - pad, landau_level(khi, b) + pad};
    const auto v = values_at(xs[0], w);
    for (int ib = 0; ib < nb; ++ib) {
      const int k = k_set[ib];
      const double e = landau_level(k, b);
      const double spacing = std::min(e - landau_level(k - 1, b), landau_level(k + 1, b) - e);
      int hits = 0;
      for (double x : v)
        if (std::abs(x - e) <= opt.spacing_fraction * spacing) {
          lam[ib][0] = x;
          ++hits;
        }
      if (hits == 0)
        fail(ErrorKind::continuation, where,
             "no eigenvalue near the Landau level of branch " + std::to_string(k) + " at xi = " + std::to_string(xs[0]));
      if (hits > 1)
        fail(ErrorKind::labeling, where, "several eigenvalues near the Landau level of branch " + std::to_string(k));
    }
  }

  // chunks of samples solved in parallel in windows widened by |velocity| <= 1
  const int jobs = opt.jobs > 0 ? opt.jobs : default_jobs();
  const size_t chunk = static_cast<size_t>(std::max(4, 4 * jobs));
  for (size_t start = 1; start < xs.size(); start += chunk) {
    const size_t stop = std::min(xs.size(), start + chunk);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int ib = 0; ib < nb; ++ib) {
      lo = std::min(lo, lam[ib][start - 1]);
      hi = std::max(hi, lam[ib][start - 1]);
    }
    const double x0 = xs[start - 1];
    auto solved = parallel_map(
        stop - start,
        [&](size_t i) {
          const double reach = xs[start + i] - x0;
          return values_at(xs[start + i], {lo - reach - pad, hi + reach + pad});
        },
        jobs);
    for (size_t i = 0; i < solved.size(); ++i) {
      const size_t j = start + i;
      const auto& v = solved[i];
      std::vector<int> taken;
      for (int ib = 0; ib < nb; ++ib) {
        const double pred = j >= 2 ? 2.0 * lam[ib][j - 1] - lam[ib][j - 2] : lam[ib][j - 1];
        auto it = std::min_element(v.begin(), v.end(),
                                   [pred](double a, double c) { return std::abs(a - pred) < std::abs(c - pred); });
        if (it == v.end())
          fail(ErrorKind::continuation, where, "no eigenvalues at xi = " + std::to_string(xs[j]));
        const int idx = static_cast<int>(it - v.begin());
        double spacing = std::numeric_limits<double>::infinity();
        if (idx > 0) spacing = std::min(spacing, v[idx] - v[idx - 1]);
        if (idx + 1 < static_cast<int>(v.size())) spacing = std::min(spacing, v[idx + 1] - v[idx]);
        const double tol = opt.spacing_fraction * spacing;
        if (!(std::abs(*it - pred) <= tol))
          fail(ErrorKind::continuation, where,
               "branch " + std::to_string(k_set[ib]) + " lost at xi = " + std::to_string(xs[j]) + " (prediction " +
                   std::to_string(pred) + ", nearest " + std::to_string(*it) + ")");
        for (int other = 0; other < static_cast<int>(v.size()); ++other)
          if (other != idx && std::abs(v[other] - pred) <= tol)
            fail(ErrorKind::labeling, where,
                 "two eigenvalues match branch " + std::to_string(k_set[ib]) + " at xi = " + std::to_string(xs[j]));
        if (std::find(taken.begin(), taken.end(), idx) != taken.end())
          fail(ErrorKind::labeling, where, "two branches claim one eigenvalue at xi = " + std::to_string(xs[j]));
        taken.push_back(idx);
        lam[ib][j] = *it;
      }
    }
  }

  // eigenfunctions and velocities for every labelled sample
  const size_t total = nb * xs.size();
  auto pairs = parallel_map(
      total,
      [&](size_t t) {
        const int ib = static_cast<int>(t / xs.size());
        const size_t j = t % xs.size();
        const FiberProblem p{b, xs[j]};
        const double l = lam[ib][j];
        const EdgeEigenpair e = make_eigenpair(p, GridSpec::for_problem(p, std::abs(l) + pad), l);
        return BranchSample{xs[j], e.lambda, hf_velocity(e), e.bc_residual, e.ode_residual};
      },
      jobs);

  std::vector<DispersionBranch> out(nb);
  for (int ib = 0; ib < nb; ++ib) {
    out[ib].k = k_set[ib];
    out[ib].b = b;
    out[ib].samples.assign(pairs.begin() + ib * xs.size(), pairs.begin() + (ib + 1) * xs.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Edge gap below zero
// ---------------------------------------------------------------------------

struct EdgeGap {
  double lambda_bar = 0.0;  // global maximum of the k = -1 branch
  double xi_star = 0.0;     // where it is attained
  Interval gap() const { return {lambda_bar, 0.0}; }
};

/// The maximum of the first negative branch, located on a sweep and refined by
/// solving velocity = 0.
inline EdgeGap edge_gap_estimate(double b, const std::vector<DispersionBranch>& negative) {
  constexpr const char* where = "edge_gap_estimate";
  const DispersionBranch* br = nullptr;
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& x : negative) {
    if (x.k == -1) br = &x;
    if (x.k < 0) top = std::max(top, x.max_lambda());
  }
  require(br != nullptr && br->samples.size() >= 3, where, "the k = -1 branch is required");
  const auto& s = br->samples;
  size_t im = 0;
  for (size_t i = 0; i < s.size(); ++i)
    if (s[i].lambda > s[im].lambda) im = i;
  require(im > 0 && im + 1 < s.size(), where, "branch maximum lies at a sweep end; widen the sweep");

  auto eigen_at = [&](double xi, double guess) {
    const FiberProblem p{b, xi};
    const GridSpec g = GridSpec::for_problem(p, std::abs(guess) + 1.0);
    const double half = 0.25 * std::sqrt(b);
    const auto v = fiber_grid_eigenvalues(p, g, {guess - half, guess + half});
    if (v.empty()) fail(ErrorKind::continuation, where, "branch lost near its maximum");
    const double l = *std::min_element(v.begin(), v.end(), [guess](double a, double c) {
      return std::abs(a - guess) < std::abs(c - guess);
    });
    return make_eigenpair(p, g, l);
  };
  auto vel = [&](double xi) { return hf_velocity(eigen_at(xi, s[im].lambda)); };
  double a = s[im - 1].xi, c = s[im + 1].xi;
  double fa = vel(a), fc = vel(c);
  EdgeGap out;
  if (fa * fc > 0.0) {
    out.xi_star = s[im].xi;
    out.lambda_bar = s[im].lambda;
  } else {
    std::uintmax_t iters = 100;
    auto r = boost::math::tools::toms748_solve(vel, a, c, fa, fc, boost::math::tools::eps_tolerance<double>(45), iters);
    out.xi_star = 0.5 * (r.first + r.second);
    out.lambda_bar = eigen_at(out.xi_star, s[im].lambda).lambda;
  }
  out.lambda_bar = std::max(out.lambda_bar, top);
  if (!(out.lambda_bar < 0.0))
    fail(ErrorKind::invariant, where, "negative branch reaches lambda = " + std::to_string(out.lambda_bar));
  return out;
}

/// Traces k = -3..-1 over a sweep that contains the maximum and estimates the gap.
inline EdgeGap edge_gap_estimate(double b, int jobs = 0) {
  require(b > 0.0 && std::isfinite(b), "edge_gap_estimate", "b must be positive");
  const double sb = std::sqrt(b);
  const XiRange r{required_sweep_start(b, 3), 3.0 * sb, 0.05 * sb};
  return edge_gap_estimate(b, trace_branches(b, r, {-3, -2, -1}, {jobs}));
}

}  // namespace dll
