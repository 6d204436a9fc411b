#pragma once

// Bulk and edge sides of the quantum Hall correspondence for the Dirac-Landau
// operator: bulk traces over Landau levels, the integrated density of states and
// its b-slope, edge currents and spectral flow from fiber dispersion branches,
// and the real-space Chern integral of the zero-mode projection.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dll/errors.hpp"
#include "dll/fiber.hpp"
#include "dll/funcalc.hpp"
#include "dll/kernels.hpp"
#include "dll/landau.hpp"
#include "dll/parallel.hpp"

namespace dll {

/// Unit cell, strip [0,1] x [0,L], or the semi-infinite strip [0,1] x [0,inf).
struct Region {
  enum class Kind { unit_cell, strip, semi_infinite_strip };
  Kind kind = Kind::unit_cell;
  double L = 1.0;

  static Region strip(double L) {
    if (!(L >= 1.0)) fail(ErrorKind::construction, "Region", "strip length must be >= 1");
    return {Kind::strip, L};
  }
  double area() const {
    switch (kind) {
      case Kind::unit_cell: return 1.0;
      case Kind::strip: return L;
      case Kind::semi_infinite_strip: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }
};

// ---------------------------------------------------------------------------
// Bulk side
// ---------------------------------------------------------------------------

namespace detail {

inline void require_bulk_args(double b, int k_max, const char* where) {
  require(b > 0.0 && std::isfinite(b), where, "b must be positive");
  require(k_max >= 0, where, "k_max must be non-negative");
}

inline void check_tail(double tail, double sum, const char* where) {
  if (!(tail <= 1e-14 * std::abs(sum)))
    fail(ErrorKind::truncation, where,
         "level sum not converged: tail term " + std::to_string(tail) + " against sum " + std::to_string(sum));
}

}  // namespace detail

/// (b / 2pi) sum_{|k| <= k_max} f(sgn(k) sqrt(2|k|b))
inline double bulk_trace(const TestFunction& f, double b, int k_max) {
  constexpr const char* where = "bulk_trace";
  detail::require_bulk_args(b, k_max, where);
  double sum = 0.0;
  for (int k = -k_max; k <= k_max; ++k) sum += f(landau_level(k, b));
  const double tail = std::max(std::abs(f(landau_level(k_max, b))), std::abs(f(landau_level(-k_max, b))));
  if (k_max > 0 || sum != 0.0) detail::check_tail(tail, sum, where);
  return b / (2.0 * std::numbers::pi) * sum;
}

/// d/db of bulk_trace: (1/2pi) sum_k [f(e_k) + f'(e_k) e_k / 2].
inline double bulk_trace_derivative(const TestFunction& f, double b, int k_max) {
  constexpr const char* where = "bulk_trace_derivative";
  detail::require_bulk_args(b, k_max, where);
  auto term = [&](int k) {
    const double e = landau_level(k, b);
    return f(e) + 0.5 * f.deriv(e) * e;
  };
  double sum = 0.0;
  for (int k = -k_max; k <= k_max; ++k) sum += term(k);
  const double tail = std::max(std::abs(term(k_max)), std::abs(term(-k_max)));
  if (k_max > 0 || sum != 0.0) detail::check_tail(tail, sum, where);
  return sum / (2.0 * std::numbers::pi);
}

/// Smallest k_max for which the level sums of f pass their tail test, up to `limit`.
inline int bulk_cutoff(const TestFunction& f, double b, int limit = 100000) {
  if (const auto& s = f.support()) {
    const double reach = std::max(std::abs(s->lo), std::abs(s->hi));
    return static_cast<int>(std::ceil(reach * reach / (2.0 * b))) + 1;
  }
  double sum = f(0.0);
  for (int k = 1; k <= limit; ++k) {
    const double a = f(landau_level(k, b)), c = f(landau_level(-k, b));
    const double da = std::abs(f.deriv(landau_level(k, b)) * landau_level(k, b));
    const double dc = std::abs(f.deriv(landau_level(-k, b)) * landau_level(-k, b));
    sum += a + c;
    if (std::max({std::abs(a), std::abs(c), da, dc}) <= 1e-16 * std::max(std::abs(sum), 1e-300)) return k;
  }
  fail(ErrorKind::truncation, "bulk_cutoff", "test function does not decay over the Landau levels");
}

/// Integrated density of states of an island: N b / 2pi.
inline double ids(const SpectralIsland& island, double b) {
  require(b > 0.0 && std::isfinite(b), "ids", "b must be positive");
  return island.size() * b / (2.0 * std::numbers::pi);
}

struct StredaResult {
  double slope = 0.0;
  double intercept = 0.0;
  double chern_estimate = 0.0;  // 2 pi slope
  double residual = 0.0;        // max |fit - ids| over the grid
};

/// Least-squares slope of the IDS over a grid of field strengths.
inline StredaResult streda_slope(const SpectralIsland& island, const std::vector<double>& b_grid) {
  constexpr const char* where = "streda_slope";
  require(b_grid.size() >= 3, where, "need at least three field values");
  for (double b : b_grid)
    if (!(b > 0.0) || !std::isfinite(b))
      fail(ErrorKind::validity, where, "spectral gaps close at b = " + std::to_string(b));
  const int n = static_cast<int>(b_grid.size());
  double mb = 0.0, mi = 0.0;
  for (double b : b_grid) {
    mb += b;
    mi += ids(island, b);
  }
  mb /= n;
  mi /= n;
  double sbb = 0.0, sbi = 0.0;
  for (double b : b_grid) {
    sbb += (b - mb) * (b - mb);
    sbi += (b - mb) * (ids(island, b) - mi);
  }
  require(sbb > 0.0, where, "field values must not all coincide");
  StredaResult r;
  r.slope = sbi / sbb;
  r.intercept = mi - r.slope * mb;
  r.chern_estimate = 2.0 * std::numbers::pi * r.slope;
  for (double b : b_grid) r.residual = std::max(r.residual, std::abs(r.intercept + r.slope * b - ids(island, b)));
  return r;
}

// ---------------------------------------------------------------------------
// Edge side
// ---------------------------------------------------------------------------

namespace detail {

// Composite Simpson on uniform samples; a 3/8 panel absorbs an odd interval count.
inline double uniform_simpson(const std::vector<double>& y, double h) {
  const size_t n = y.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (y[0] + y[1]);
  if (n == 3) return h / 3.0 * (y[0] + 4.0 * y[1] + y[2]);
  size_t m = n - 1;  // intervals
  double tail = 0.0;
  if (m % 2 == 1) {
    tail = 3.0 * h / 8.0 * (y[n - 4] + 3.0 * y[n - 3] + 3.0 * y[n - 2] + y[n - 1]);
    m -= 3;
  }
  double s = y[0] + y[m];
  for (size_t i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
  return s * h / 3.0 + tail;
}

inline double branch_step(const DispersionBranch& br) {
  const auto& s = br.samples;
  const double h = (s.back().xi - s.front().xi) / static_cast<double>(s.size() - 1);
  for (size_t i = 1; i < s.size(); ++i)
    if (std::abs(s[i].xi - s[i - 1].xi - h) > 1e-9 * (1.0 + std::abs(h)))
      fail(ErrorKind::precondition, "edge_current", "branch samples must be uniform in xi");
  return h;
}

}  // namespace detail

/// int f'(lambda_k(xi)) lambda_k'(xi) dxi over the sweep, by Simpson on the
/// samples with the Hellmann-Feynman velocities.
inline double branch_current_integral(const TestFunction& f, const DispersionBranch& br) {
  require(br.samples.size() >= 2, "edge_current", "branch has fewer than two samples");
  const double h = detail::branch_step(br);
  std::vector<double> y(br.samples.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = f.deriv(br.samples[i].lambda) * br.samples[i].velocity;
  return detail::uniform_simpson(y, h);
}

/// f(lambda_k(xi_max)) - f(lambda_k(xi_min)), the exact value of the integral above.
inline double branch_telescoped(const TestFunction& f, const DispersionBranch& br) {
  return f(br.samples.back().lambda) - f(br.samples.front().lambda);
}

/// -(1/2pi) sum_k int f'(lambda_k) lambda_k' dxi
inline double edge_current(const TestFunction& f, double b, const std::vector<DispersionBranch>& branches) {
  constexpr const char* where = "edge_current";
  require(b > 0.0, where, "b must be positive");
  double total = 0.0;
  for (const auto& br : branches) {
    require(std::abs(br.b - b) <= 1e-12 * b, where, "branch computed at a different field");
    require(br.samples.size() >= 2, where, "branch has fewer than two samples");
    for (const auto* s : {&br.samples.front(), &br.samples.back()})
      if (f.deriv(s->lambda) != 0.0)
        fail(ErrorKind::coverage, where,
             "branch " + std::to_string(br.k) + " is inside the support of f' at xi = " + std::to_string(s->xi));
    total += branch_current_integral(f, br);
  }
  return -total / (2.0 * std::numbers::pi);
}

/// Signed number of branch crossings through mu (sign of the velocity).
inline int spectral_flow(double mu, const std::vector<DispersionBranch>& branches) {
  constexpr const char* where = "spectral_flow";
  require(!branches.empty(), where, "no branches");
  const double b = branches.front().b;
  const int kmax = static_cast<int>(std::ceil(mu * mu / (2.0 * b))) + 1;
  for (int k = -kmax; k <= kmax; ++k)
    require(std::abs(mu - landau_level(k, b)) > 1e-6, where, "mu must lie in a bulk gap");
  int flow = 0;
  for (const auto& br : branches) {
    const auto& s = br.samples;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i].lambda == mu && std::abs(s[i].velocity) < 1e-10)
        fail(ErrorKind::accuracy, where, "ambiguous crossing of branch " + std::to_string(br.k));
      if (i + 1 == s.size()) break;
      const double a = s[i].lambda - mu, c = s[i + 1].lambda - mu;
      if ((a < 0.0 && c >= 0.0) || (a >= 0.0 && c < 0.0)) flow += c > a ? 1 : -1;
    }
  }
  return flow;
}

// ---------------------------------------------------------------------------
// Zero-mode projection and its Chern character
// ---------------------------------------------------------------------------

/// Kernel of the projection onto the zero Dirac-Landau level in the Landau
/// gauge; the level is polarized in the upper spinor component.
class ProjectionKernel {
 public:
  explicit ProjectionKernel(double b) : b_(b) {
    if (!(b > 0.0) || !std::isfinite(b)) fail(ErrorKind::construction, "ProjectionKernel", "b must be positive");
  }

  double b() const noexcept { return b_; }

  /// The scalar part: (b/2pi) exp(-b|x-y|^2/4 - i (b/2)(x2 + y2)(x1 - y1)).
  cplx scalar(PlanePoint x, PlanePoint y) const {
    const double d1 = x.x1 - y.x1, d2 = x.x2 - y.x2;
    const double mod = b_ / (2.0 * std::numbers::pi) * std::exp(-0.25 * b_ * (d1 * d1 + d2 * d2));
    const double ph = -0.5 * b_ * (x.x2 + y.x2) * d1;
    return {mod * std::cos(ph), mod * std::sin(ph)};
  }

  SpinorMatrix operator()(PlanePoint x, PlanePoint y) const {
    SpinorMatrix m = SpinorMatrix::Zero();
    m(0, 0) = scalar(x, y);
    return m;
  }

 private:
  double b_;
};

namespace detail {

// Square lattice of spacing h filling the disc of radius R around c.
inline std::vector<PlanePoint> disc_lattice(PlanePoint c, double h, double R) {
  std::vector<PlanePoint> pts;
  const int m = static_cast<int>(std::ceil(R / h));
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      if (std::hypot(i * h, j * h) <= R) pts.push_back({c.x1 + i * h, c.x2 + j * h});
  return pts;
}

}  // namespace detail

struct ProjectionChecks {
  double trace_defect = 0.0;        // max |tr P(x,x) - b/2pi|
  double idempotency_defect = 0.0;  // max |(P o P - P)(x,y)| / (b/2pi)
  double covariance_defect = 0.0;   // max over probes of the magnetic-translation defect
};

/// Checks the projection kernel on fixed probe points by lattice quadrature.
inline ProjectionChecks check_projection_kernel(const ProjectionKernel& P) {
  const double b = P.b(), sb = std::sqrt(b);
  const double scale = b / (2.0 * std::numbers::pi);
  ProjectionChecks c;
  const PlanePoint probes[] = {{0.0, 0.0}, {0.3, -0.7}, {1.2, 0.4}, {-0.5, 2.0}};
  for (auto x : probes) c.trace_defect = std::max(c.trace_defect, std::abs(P(x, x).trace() - scale));

  const double h = 0.3 / sb, R = 11.0 / sb;
  for (auto x : probes) {
    for (auto y : {PlanePoint{x.x1 + 0.4 / sb, x.x2 - 0.2 / sb}, PlanePoint{x.x1 - 1.1 / sb, x.x2 + 0.9 / sb}}) {
      const PlanePoint mid{0.5 * (x.x1 + y.x1), 0.5 * (x.x2 + y.x2)};
      cplx acc = 0.0;
      for (const auto& w : detail::disc_lattice(mid, h, R)) acc += P.scalar(x, w) * P.scalar(w, y);
      acc *= h * h;
      c.idempotency_defect = std::max(c.idempotency_defect, std::abs(acc - P.scalar(x, y)) / scale);
    }
  }
  // P(x, y) = e^{i b phi2(x, eta)} P(x - eta, y - eta) e^{-i b phi2(y, eta)}
  const PlanePoint etas[] = {{0.7, -1.3}, {-2.0, 0.5}, {0.25, 3.0}};
  for (auto x : probes)
    for (auto eta : etas) {
      const PlanePoint y{x.x2 - 0.6, x.x1 + 0.2};
      const cplx lhs = P.scalar(x, y);
      const cplx rhs = std::polar(1.0, b * landau_phase_phi2(x, eta)) * P.scalar(x - eta, y - eta) *
                       std::polar(1.0, -b * landau_phase_phi2(y, eta));
      c.covariance_defect = std::max(c.covariance_defect, std::abs(lhs - rhs) / scale);
    }
  return c;
}

/// The zero-mode projection kernel, after its defining identities are checked.
inline ProjectionKernel zero_mode_projection_kernel(double b) {
  ProjectionKernel P(b);
  const auto c = check_projection_kernel(P);
  if (!(c.trace_defect <= 1e-8 * b && c.idempotency_defect <= 1e-6 && c.covariance_defect <= 1e-10))
    fail(ErrorKind::construction, "zero_mode_projection_kernel", "kernel fails its projection identities");
  return P;
}

struct ChernResult {
  double value = 0.0;
  double abs_error = 0.0;  // spread between lattice spacings and cell points
};

namespace detail {

// 2 pi tr(i P [[X1,P],[X2,P]])(x, x) on a lattice of spacing h and radius R.
inline double chern_density(const ProjectionKernel& P, PlanePoint x, double h, double R, int jobs) {
  const auto pts = disc_lattice(x, h, R);
  const size_t n = pts.size();
  std::vector<cplx> p_wx(n);
  for (size_t j = 0; j < n; ++j) p_wx[j] = P.scalar(pts[j], x);
  // rows of the y-sum, evaluated in parallel and summed in index order
  const double cut2 = R * R;
  auto row = [&](size_t i) {
    const PlanePoint y = pts[i];
    cplx inner = 0.0;
    for (size_t j = 0; j < n; ++j) {
      const PlanePoint w = pts[j];
      const double d1 = y.x1 - w.x1, d2 = y.x2 - w.x2;
      if (d1 * d1 + d2 * d2 > cut2) continue;
      const double geo = d1 * (w.x2 - x.x2) - d2 * (w.x1 - x.x1);
      inner += P.scalar(y, w) * p_wx[j] * geo;
    }
    return P.scalar(x, y) * inner;
  };
  const auto rows = parallel_map(n, row, jobs);
  cplx total = 0.0;
  for (const auto& r : rows) total += r;
  total *= h * h * h * h;
  return 2.0 * std::numbers::pi * (cplx(0.0, 1.0) * total).real();
}

}  // namespace detail

/// Ch = 2 pi int_Omega tr(i P [[X1,P],[X2,P]])(x,x) dx for the zero-mode
/// projection, with both inner plane integrals done by lattice sums over a
/// disc of radius quad_radius and the cell integral by 2x2 Gauss points.
inline ChernResult chern_zero_mode(double b, double quad_radius = -1.0, int jobs = 0) {
  constexpr const char* where = "chern_zero_mode";
  require(b > 0.0 && std::isfinite(b), where, "b must be positive");
  const double sb = std::sqrt(b);
  const double R = quad_radius > 0.0 ? quad_radius : 11.0 / sb;
  require(std::exp(-0.25 * b * R * R) * b * R * R < 1e-10, where,
          "quad_radius too small: Gaussian tail above 1e-10");
  const ProjectionKernel P = zero_mode_projection_kernel(b);
  const double g = 0.5 / std::sqrt(3.0);
  const double nodes[] = {0.5 - g, 0.5 + g};
  auto cell_average = [&](double h) {
    double s = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double u : nodes)
      for (double v : nodes) {
        const double d = detail::chern_density(P, {u, v}, h, R, jobs);
        s += 0.25 * d;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    return std::pair{s, hi - lo};
  };
  const auto [fine, spread_f] = cell_average(0.3 / sb);
  const auto [coarse, spread_c] = cell_average(0.4 / sb);
  ChernResult r;
  r.value = fine;
  r.abs_error = std::abs(fine - coarse) + spread_f + spread_c;
  if (r.abs_error > 1e-6) throw AccuracyError(where, "lattice sums disagree", r.value, r.abs_error);
  return r;
}

// ---------------------------------------------------------------------------
// Bulk-edge report
// ---------------------------------------------------------------------------

struct CorrespondenceTolerances {
  double edge_rel = 1e-3;      // |edge - (1/2pi) sum f(e_k)|, relative to 1/2pi
  double chain_abs = 1e-3;     // |edge - d bulk / db|
  double streda_abs = 1e-9;    // |2 pi slope - N|
  double telescoping = 1e-3;   // per-branch quadrature vs exact difference
  double routes = 1e-3;        // agreement of the Chern estimates
};

struct BranchDiagnostics {
  int k = 0;
  double integral = 0.0;
  double telescoped = 0.0;
  double xi_min = 0.0, xi_max = 0.0;
  double lambda_min = 0.0, lambda_max = 0.0;
};

struct CorrespondenceReport {
  double b = 0.0;
  SpectralIsland island{0, 0};
  double ids_value = 0.0;            // N b / 2pi
  double bulk_trace_value = 0.0;     // B_f(b) for the gap function
  double bulk_value = 0.0;           // d B_f / db
  double level_sum = 0.0;            // (1/2pi) sum_k f(e_k)
  double edge_value = 0.0;           // edge current
  StredaResult streda;
  int spectral_flow = 0;             // flow_above - flow_below
  int flow_above = 0;                // at mid-gap above the island
  double flow_above_energy = 0.0;
  int flow_below = 0;                // below the island; lambda_bar / 2 when k_lo = 0
  double flow_below_energy = 0.0;
  double lambda_bar = 0.0;           // max of branch -1
  std::optional<double> chern_real_space;  // island {0} only
  double abs_err = 0.0;              // |bulk_value - edge_value|
  double rel_err = 0.0;              // abs_err relative to 1/2pi
  double edge_vs_levels = 0.0;       // |edge_value - level_sum| relative to 1/2pi
  double telescoping_max = 0.0;
  XiRange sweep;
  std::vector<BranchDiagnostics> branches;
  CorrespondenceTolerances tolerances;
  bool pass_edge = false, pass_chain = false, pass_streda = false, pass_flow = false, pass_telescoping = false,
       pass_routes = false;
  bool pass = false;
};

struct ReportOptions {
  double margin = 0.25;  // gap-function margin
  double xi_step = -1.0;  // default 0.0125 / sqrt(b)
  int jobs = 0;
  CorrespondenceTolerances tolerances{};
};

/// The branch set needed for an island: k_lo - 1 up to max(k_hi, 0).
inline std::vector<int> report_branch_set(const SpectralIsland& island) {
  std::vector<int> ks;
  for (int k = island.k_lo() - 1; k <= std::max(island.k_hi(), 0); ++k) ks.push_back(k);
  return ks;
}

inline CorrespondenceReport bulk_edge_report(const SpectralIsland& island, double b, const ReportOptions& opt = {}) {
  constexpr const char* where = "bulk_edge_report";
  require(b > 0.0 && std::isfinite(b), where, "b must be positive");
  CorrespondenceReport r;
  r.b = b;
  r.island = island;
  r.tolerances = opt.tolerances;
  const TestFunction f = make_gap_function(island, b, opt.margin);
  const int nlev = island.size();
  const double unit = 1.0 / (2.0 * std::numbers::pi);

  const int kcut = bulk_cutoff(f, b);
  r.ids_value = ids(island, b);
  r.bulk_trace_value = bulk_trace(f, b, kcut);
  r.bulk_value = bulk_trace_derivative(f, b, kcut);
  double lev = 0.0;
  for (int k = -kcut; k <= kcut; ++k) lev += f(landau_level(k, b));
  r.level_sum = lev * unit;
  r.streda = streda_slope(island, {0.9 * b, b, 1.1 * b});

  // sweep: from the Landau asymptotes to where every branch has left supp f'
  const auto ks = report_branch_set(island);
  int kmax = 0;
  for (int k : ks) kmax = std::max(kmax, std::abs(k));
  const double sb = std::sqrt(b);
  const Interval supp = *f.support();
  const double clear = 3.0 * opt.margin * std::min(landau_level(island.k_lo(), b) - landau_level(island.k_lo() - 1, b),
                                                   landau_level(island.k_hi() + 1, b) - landau_level(island.k_hi(), b));
  const double step = opt.xi_step > 0.0 ? opt.xi_step : 0.0125 / sb;
  const double start = std::floor(required_sweep_start(b, kmax) / step) * step;
  double stop = std::max(std::abs(supp.lo), std::abs(supp.hi)) + clear + sb;
  std::vector<DispersionBranch> branches;
  for (int attempt = 0;; ++attempt) {
    r.sweep = {start, start + std::ceil((stop - start) / step) * step, step};
    branches = trace_branches(b, r.sweep, ks, {opt.jobs});
    bool covered = true;
    for (const auto& br : branches) {
      const double end = br.samples.back().lambda;
      if (end > supp.lo - clear && end < supp.hi + clear) covered = false;
    }
    if (covered) break;
    if (attempt >= 4) fail(ErrorKind::coverage, where, "branches did not leave the support of f'");
    stop += 2.0 * sb;
  }

  r.edge_value = edge_current(f, b, branches);
  for (const auto& br : branches) {
    BranchDiagnostics d;
    d.k = br.k;
    d.integral = branch_current_integral(f, br);
    d.telescoped = branch_telescoped(f, br);
    d.xi_min = br.samples.front().xi;
    d.xi_max = br.samples.back().xi;
    d.lambda_min = br.samples.front().lambda;
    d.lambda_max = br.samples.back().lambda;
    r.telescoping_max = std::max(r.telescoping_max, std::abs(d.integral - d.telescoped));
    r.branches.push_back(d);
  }

  for (const auto& br : branches)
    if (br.k == -1) r.lambda_bar = br.max_lambda();
  r.flow_above_energy = 0.5 * (landau_level(island.k_hi(), b) + landau_level(island.k_hi() + 1, b));
  r.flow_below_energy = island.k_lo() == 0 ? 0.5 * r.lambda_bar
                                           : 0.5 * (landau_level(island.k_lo() - 1, b) + landau_level(island.k_lo(), b));
  r.flow_above = spectral_flow(r.flow_above_energy, branches);
  r.flow_below = spectral_flow(r.flow_below_energy, branches);
  r.spectral_flow = r.flow_above - r.flow_below;
  if (island.k_lo() == 0 && island.k_hi() == 0) r.chern_real_space = chern_zero_mode(b, -1.0, opt.jobs).value;

  r.abs_err = std::abs(r.bulk_value - r.edge_value);
  r.rel_err = r.abs_err / unit;
  r.edge_vs_levels = std::abs(r.edge_value - r.level_sum) / unit;
  const auto& tol = r.tolerances;
  // a gap function equals 1 exactly on the island's levels and 0 on the others
  r.pass_edge = r.edge_vs_levels <= tol.edge_rel && std::abs(r.level_sum - nlev * unit) <= 1e-12;
  r.pass_chain = r.abs_err <= tol.chain_abs;
  r.pass_streda = std::abs(r.streda.chern_estimate - nlev) <= tol.streda_abs && r.streda.residual <= 1e-12;
  r.pass_flow = r.spectral_flow == nlev && (island.k_lo() != 0 || r.flow_below == 0);
  r.pass_routes = std::abs(r.streda.chern_estimate - r.spectral_flow) <= tol.routes &&
                  (!r.chern_real_space || std::abs(*r.chern_real_space - r.streda.chern_estimate) <= tol.routes);
  r.pass_telescoping = r.telescoping_max <= tol.telescoping;
  r.pass = r.pass_edge && r.pass_chain && r.pass_streda && r.pass_flow && r.pass_telescoping && r.pass_routes;
  return r;
}

}  // namespace dll
