#pragma once

// Smooth test functions, almost-analytic extensions, and the Helffer-Sjostrand
// formula for functions of small real symmetric matrices.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dll/errors.hpp"
#include "dll/interval.hpp"
#include "dll/jet.hpp"
#include "dll/landau.hpp"
#include "dll/parallel.hpp"
#include "dll/quadrature.hpp"

namespace dll {

/// A smooth real function known through its Taylor jets.
///
/// `window` bounds the region where f or its derivatives are numerically
/// non-zero; `active` lists the sub-intervals where f' may be non-zero.
class TestFunction {
 public:
  template <class F>
  TestFunction(F f, std::string smoothness, Interval window, std::optional<Interval> support = std::nullopt,
               std::optional<Interval> plateau = std::nullopt, std::vector<Interval> active = {})
      : value_([f](double t) { return f(Jet<0>(t)).value(); }),
        first_([f](double t) { return f(Jet<1>::variable(t)); }),
        jet_([f](double t) { return f(TaylorJet::variable(t)); }),
        smoothness_(std::move(smoothness)),
        window_(window),
        support_(support),
        plateau_(plateau),
        active_(active.empty() ? std::vector<Interval>{window} : std::move(active)) {}

  double operator()(double t) const { return value_(t); }
  double eval(double t) const { return value_(t); }
  double deriv(double t) const { return first_(t).derivative(1); }
  TaylorJet jet(double t) const { return jet_(t); }

  const std::string& smoothness() const noexcept { return smoothness_; }
  const Interval& window() const noexcept { return window_; }
  const std::optional<Interval>& support() const noexcept { return support_; }
  const std::optional<Interval>& plateau() const noexcept { return plateau_; }
  const std::vector<Interval>& active() const noexcept { return active_; }

  /// True if f' is known to vanish at t (outside every active interval).
  bool derivative_vanishes_at(double t) const {
    return std::none_of(active_.begin(), active_.end(), [t](const Interval& i) { return i.contains(t); });
  }

  static TestFunction zero() {
    return TestFunction([](const auto& t) { return 0.0 * t; }, "zero", {0.0, 0.0}, Interval{0.0, 0.0},
                        std::nullopt, {Interval{0.0, 0.0}});
  }

  /// exp(-t^2); its jets are negligible (< 1e-20) beyond |t| = 8.5.
  static TestFunction gaussian() {
    return TestFunction([](const auto& t) { return exp(-(t * t)); }, "schwartz", {-8.5, 8.5});
  }

 private:
  std::function<double(double)> value_;
  std::function<Jet<1>(double)> first_;
  std::function<TaylorJet(double)> jet_;
  std::string smoothness_;
  Interval window_;
  std::optional<Interval> support_;
  std::optional<Interval> plateau_;
  std::vector<Interval> active_;
};

/// C-infinity bump equal to 1 on `plateau` and 0 outside `support`, built from
/// exp(-1/u) ramps.
inline TestFunction make_plateau_function(Interval support, Interval plateau) {
  if (!(support.lo < plateau.lo && plateau.lo <= plateau.hi && plateau.hi < support.hi))
    fail(ErrorKind::construction, "make_plateau_function", "need support.lo < plateau.lo <= plateau.hi < support.hi");
  const double s_lo = support.lo, p_lo = plateau.lo, p_hi = plateau.hi, s_hi = support.hi;
  auto f = [=](const auto& t) {
    return mollifier::smoothstep((t - s_lo) / (p_lo - s_lo)) * mollifier::smoothstep((s_hi - t) / (s_hi - p_hi));
  };
  return TestFunction(f, "compact", support, support, plateau, {Interval{s_lo, p_lo}, Interval{p_hi, s_hi}});
}

/// Gap function of an island: 1 on a neighbourhood of its levels, 0 within
/// margin * (gap width) of the neighbouring levels, ramps in between.
inline TestFunction make_gap_function(const SpectralIsland& island, double b, double margin = 0.25) {
  constexpr const char* where = "make_gap_function";
  if (!(b > 0.0) || !std::isfinite(b)) fail(ErrorKind::construction, where, "b must be positive");
  if (!(margin > 0.0 && margin < 0.5)) fail(ErrorKind::construction, where, "margin must lie in (0, 1/2)");
  const double e_lo = landau_level(island.k_lo(), b), e_hi = landau_level(island.k_hi(), b);
  const double below = landau_level(island.k_lo() - 1, b), above = landau_level(island.k_hi() + 1, b);
  const double g_lo = e_lo - below, g_hi = above - e_hi;
  if (!(g_lo > 1e-12 && g_hi > 1e-12)) fail(ErrorKind::construction, where, "island touches a neighbouring level");
  return make_plateau_function({below + margin * g_lo, above - margin * g_hi},
                               {e_lo - margin * g_lo, e_hi + margin * g_hi});
}

using cplx = std::complex<double>;

/// f_N(z1 + i z2) = g(z2) sum_{j<=N} f^(j)(z1) (i z2)^j / j!
class AlmostAnalyticExtension {
 public:
  AlmostAnalyticExtension(TestFunction f, int order) : f_(std::move(f)), n_(order) {
    if (order < 1 || order + 1 > kJetOrder)
      fail(ErrorKind::precondition, "almost_analytic_extension",
           "order must lie in [1, " + std::to_string(kJetOrder - 1) + "]");
  }

  int order() const noexcept { return n_; }
  const TestFunction& function() const noexcept { return f_; }

  /// The vertical cutoff: 1 on [-1/2, 1/2], 0 outside [-1, 1].
  template <class T>
  static T cutoff(const T& y) {
    return y.value() >= 0.0 ? mollifier::smoothstep(2.0 - 2.0 * y) : mollifier::smoothstep(2.0 + 2.0 * y);
  }
  static double cutoff(double y) { return cutoff(Jet<0>(y)).value(); }

  cplx eval(cplx z) const {
    const double g = cutoff(z.imag());
    if (g == 0.0) return 0.0;
    const TaylorJet c = checked_jet(z.real());
    return g * partial_sum(c, cplx(0.0, z.imag()));
  }

  /// d/dz1 f_N + i d/dz2 f_N
  cplx dbar(cplx z) const {
    const auto g = cutoff(Jet<1>::variable(z.imag()));
    if (g.value() == 0.0 && g[1] == 0.0) return 0.0;
    const TaylorJet c = checked_jet(z.real());
    const cplx p(0.0, z.imag());
    const cplx top = double(n_ + 1) * c[n_ + 1] * std::pow(p, n_);
    return g.value() * top + cplx(0.0, g[1]) * partial_sum(c, p);
  }

  /// max |dbar(z)| <z1>^N / |z2|^N over a sample grid covering the window.
  double estimate_decay_constant(int samples = 200) const {
    const Interval w = f_.window();
    double best = 0.0;
    for (int i = 0; i <= samples; ++i) {
      const double z1 = w.lo + (w.hi - w.lo) * i / samples;
      const double bracket = std::sqrt(1.0 + z1 * z1);
      for (int j = 1; j <= samples; ++j) {
        const double z2 = double(j) / samples;
        best = std::max(best, std::abs(dbar({z1, z2})) * std::pow(bracket / z2, n_));
      }
    }
    return best;
  }

 private:
  TaylorJet checked_jet(double x) const {
    TaylorJet c = f_.jet(x);
    if (!isfinite(c))
      throw AccuracyError("almost_analytic_extension", "non-finite derivative of the test function", x, 0.0);
    return c;
  }

  cplx partial_sum(const TaylorJet& c, cplx p) const {
    cplx s = 0.0, pw = 1.0;
    for (int j = 0; j <= n_; ++j) {
      s += c[j] * pw;
      pw *= p;
    }
    return s;
  }

  TestFunction f_;
  int n_;
};

inline AlmostAnalyticExtension almost_analytic_extension(const TestFunction& f, int order) {
  return {f, order};
}

// ---------------------------------------------------------------------------
// Helffer-Sjostrand matrix functions
// ---------------------------------------------------------------------------

struct HsOptions {
  double tolerance = 1e-7;  // absolute, on matrix entries
  int max_outer_panels = 400;
  int max_inner_panels = 4000;
  int jobs = 0;
};

struct HsResult {
  Eigen::MatrixXd value;
  double error_estimate = 0.0;
  double cutoff_bound = 0.0;  // bound on the neglected strip near the real axis
  double imag_residual = 0.0;  // max |Im| entry of the assembled result
  long evaluations = 0;
};

namespace detail {

// Diagonal entries of (T - z)^{-1}, T symmetric tridiagonal with diagonal a and off-diagonal e.
inline cplx tridiag_resolvent_trace(const Eigen::VectorXd& a, const Eigen::VectorXd& e, cplx z,
                                    std::vector<cplx>& left, std::vector<cplx>& right) {
  const int n = static_cast<int>(a.size());
  left.resize(n);
  right.resize(n);
  left[0] = a[0] - z;
  for (int i = 1; i < n; ++i) left[i] = (a[i] - z) - e[i - 1] * e[i - 1] / left[i - 1];
  right[n - 1] = a[n - 1] - z;
  for (int i = n - 2; i >= 0; --i) right[i] = (a[i] - z) - e[i] * e[i] / right[i + 1];
  cplx tr = 0.0;
  for (int i = 0; i < n; ++i) tr += 1.0 / (left[i] + right[i] - (a[i] - z));
  return tr;
}

// acc += w * (T - z)^{-1}, full matrix, O(n^2).
inline void tridiag_resolvent_accumulate(const Eigen::VectorXd& a, const Eigen::VectorXd& e, cplx z, cplx w,
                                         Eigen::MatrixXcd& acc, std::vector<cplx>& left,
                                         std::vector<cplx>& right) {
  const int n = static_cast<int>(a.size());
  tridiag_resolvent_trace(a, e, z, left, right);
  for (int i = 0; i < n; ++i) {
    cplx g = 1.0 / (left[i] + right[i] - (a[i] - z));
    acc(i, i) += w * g;
    for (int j = i + 1; j < n; ++j) {
      g *= -e[j - 1] / right[j];
      if (g == 0.0) break;
      const cplx v = w * g;
      acc(i, j) += v;
      acc(j, i) += v;
    }
  }
}

}  // namespace detail

/// f(A) = (1/2pi) int dbar f_N(z) (A - z)^{-1} dz1 dz2 for real symmetric A.
///
/// Only the upper half of the strip is integrated; the lower half contributes
/// the adjoint. The z1 panels are chosen adaptively on the resolvent trace and
/// then reused for the full matrix.
inline HsResult hs_matrix_function(const Eigen::MatrixXd& A, const TestFunction& f, int order,
                                   const HsOptions& opt = {}) {
  constexpr const char* where = "hs_matrix_function";
  const Eigen::Index n = A.rows();
  require(n >= 1 && A.cols() == n, where, "matrix must be square and non-empty");
  require(n <= 512, where, "dimension must not exceed 512");
  require(order >= 3, where, "order N must be at least 3");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  require((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, where, "matrix must be symmetric");
  require(A.allFinite(), where, "matrix has non-finite entries");

  const AlmostAnalyticExtension ext(f, order);

  Eigen::MatrixXd Q;
  Eigen::VectorXd diag, off;
  if (n == 1) {
    Q = Eigen::MatrixXd::Identity(1, 1);
    diag = A.diagonal();
    off.resize(0);
  } else {
    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(A);
    Q = tri.matrixQ();
    diag = tri.diagonal();
    off = tri.subDiagonal();
  }

  // Neglected strip 0 < z2 < eps: |dbar| <= |f^(N+1)| z2^N / N! and |R| <= 1/z2.
  double fact = 1.0;
  for (int j = 2; j <= order; ++j) fact *= j;
  double top_l1 = 0.0;
  for (const Interval& iv : f.active()) {
    if (!(iv.width() > 0.0)) continue;
    auto r = quad::integrate([&](double t) { return std::abs(f.jet(t).derivative(order + 1)); }, iv.lo, iv.hi,
                             1e-14, 1e-6, 2000);
    top_l1 += r.value;
  }
  top_l1 /= fact;
  double eps = 0.25;
  if (top_l1 > 0.0)
    eps = std::min(eps, std::pow(0.1 * opt.tolerance * std::numbers::pi * order / top_l1, 1.0 / order));
  HsResult out;
  out.cutoff_bound = top_l1 * std::pow(eps, order) / (std::numbers::pi * order);

  // z1 ranges: the derivatives live on the active intervals; for z2 > 1/2 the
  // cutoff derivative also picks up f itself across the window.
  auto z1_ranges = [&](double z2) {
    std::vector<Interval> r;
    if (z2 > 0.5) {
      r.push_back(f.window());
    } else {
      for (const Interval& iv : f.active())
        if (iv.width() > 0.0) r.push_back(iv);
    }
    return r;
  };

  std::vector<double> z2_breaks;
  for (double t = 0.5; t > eps; t *= 0.5) z2_breaks.push_back(t);

  // Pass 1: adaptive meshing on the scalar trace proxy.
  std::map<double, std::vector<quad::Interval>> mesh;
  long evaluations = 0;
  std::vector<cplx> lw, rw;
  auto norm_c = [](cplx v) { return std::abs(v); };
  auto inner_proxy = [&](double z2) -> cplx {
    std::vector<quad::Interval> panels;
    cplx total = 0.0;
    for (const Interval& iv : z1_ranges(z2)) {
      auto h = [&](double z1) {
        const cplx z(z1, z2);
        const cplx d = ext.dbar(z);
        if (d == 0.0) return cplx(0.0);
        return d * detail::tridiag_resolvent_trace(diag, off, z, lw, rw);
      };
      std::vector<double> bp;
      for (int k = 1; k < 8; ++k) bp.push_back(iv.lo + iv.width() * k / 8.0);
      auto r = quad::integrate_with_norm(h, iv.lo, iv.hi, opt.tolerance, 1e-11, norm_c,
                                         opt.max_inner_panels, bp);
      evaluations += r.evaluations;
      if (!r.converged)
        throw AccuracyError(where, "inner z1 quadrature did not converge at z2 = " + std::to_string(z2),
                            std::abs(r.value), r.error);
      total += r.value;
      panels.insert(panels.end(), r.panels.begin(), r.panels.end());
    }
    mesh[z2] = std::move(panels);
    return total;
  };
  auto outer = quad::integrate_with_norm(inner_proxy, eps, 1.0, opt.tolerance, 1e-11, norm_c,
                                         opt.max_outer_panels, z2_breaks);
  if (!outer.converged)
    throw AccuracyError(where, "outer z2 quadrature did not converge", std::abs(outer.value), outer.error);

  // Pass 2: the full resolvent on the frozen mesh, one task per outer panel.
  struct PanelSum {
    Eigen::MatrixXcd value;
    double error = 0.0;
  };
  const auto& outer_panels = outer.panels;
  auto panel_task = [&](std::size_t p) {
    std::vector<cplx> l, r;
    double inner_err = 0.0;
    auto at_z2 = [&](double z2) {
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
      const auto it = mesh.find(z2);
      if (it == mesh.end()) fail(ErrorKind::invariant, where, "z2 node missing from the mesh");
      Eigen::MatrixXcd kron(n, n), gauss(n, n);
      for (const auto& panel : it->second) {
        kron.setZero();
        gauss.setZero();
        const double c = 0.5 * (panel.a + panel.b), h = 0.5 * (panel.b - panel.a);
        auto node = [&](double z1, double wk, double wg) {
          const cplx z(z1, z2);
          const cplx d = ext.dbar(z);
          if (d == 0.0) return;
          detail::tridiag_resolvent_accumulate(diag, off, z, d * (wk * h), kron, l, r);
          if (wg != 0.0) detail::tridiag_resolvent_accumulate(diag, off, z, d * (wg * h), gauss, l, r);
        };
        node(c, quad::detail::kWgk[7], quad::detail::kWg[3]);
        for (int j = 0; j < 7; ++j) {
          const double dx = h * quad::detail::kXgk[j];
          const double wg = (j % 2 == 1) ? quad::detail::kWg[j / 2] : 0.0;
          node(c - dx, quad::detail::kWgk[j], wg);
          node(c + dx, quad::detail::kWgk[j], wg);
        }
        acc += kron;
        inner_err += (kron - gauss).cwiseAbs().maxCoeff();
      }
      return acc;
    };
    auto norm_m = [](const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); };
    auto panel = quad::gk15_panel<Eigen::MatrixXcd>(at_z2, outer_panels[p].a, outer_panels[p].b, norm_m);
    // each node's inner error enters with its outer weight, bounded here by the panel width
    return PanelSum{panel.value, panel.error + inner_err * (outer_panels[p].b - outer_panels[p].a)};
  };
  const auto sums = parallel_map(outer_panels.size(), panel_task, opt.jobs);

  Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(n, n);
  double err = 0.0;
  for (const auto& s : sums) {
    X += s.value;
    err += s.error;
  }
  X /= 2.0 * std::numbers::pi;
  const Eigen::MatrixXcd fT = X + X.adjoint();
  out.imag_residual = fT.imag().cwiseAbs().maxCoeff();
  out.value = Q * fT.real() * Q.transpose();
  out.error_estimate = err / std::numbers::pi + out.cutoff_bound;
  out.evaluations = evaluations;
  if (out.error_estimate > 100.0 * opt.tolerance)
    throw AccuracyError(where, "error estimate above tolerance", out.value.cwiseAbs().maxCoeff(),
                        out.error_estimate);
  return out;
}

}  // namespace dll
