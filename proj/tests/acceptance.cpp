// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dll/dll.hpp"

using namespace dll;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = budget_s <= 0.0 || secs <= budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s  %2d  %-34s %s  [%.1f s%s]\n", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs,
              in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Branch k at fixed xi: branches never cross and lambda_{-1} < 0 <= lambda_0, so
// the k-th non-negative (k >= 0) or |k|-th negative eigenvalue carries label k.
double labelled_level(double b, double xi, int k) {
  const auto ev = solve_fiber_grid({b, xi}, 2 * (std::abs(k) + 3));
  std::vector<double> neg, pos;
  for (const auto& e : ev) (e.lambda < 0.0 ? neg : pos).push_back(e.lambda);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end(), std::greater<>());
  const auto& side = k >= 0 ? pos : neg;
  const size_t idx = k >= 0 ? static_cast<size_t>(k) : static_cast<size_t>(-k - 1);
  if (idx >= side.size()) throw std::runtime_error("too few eigenvalues for the requested label");
  return side[idx];
}

EdgeEigenpair isolated(double b, double xi, double guess) {
  const auto ev = solve_fiber_window({b, xi}, {guess - 0.02, guess + 0.02});
  if (ev.size() != 1) throw std::runtime_error("level not isolated");
  return ev.front();
}

Eigen::MatrixXd spectral_apply(const Eigen::MatrixXd& a, const TestFunction& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd fv(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) fv(i) = f(es.eigenvalues()(i));
  return es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

int main() {
  const double unit = 1.0 / (2.0 * std::numbers::pi);

  criterion(1, "edge asymptotes", 30, [] {
    const auto br = trace_branches(1.0, {-8.0, -7.9, 0.05}, {0, 1, 2});  // read at xi = -8
    double worst = 0.0;
    for (const auto& b : br) worst = std::max(worst, std::abs(b.samples.front().lambda - landau_level(b.k, 1.0)));
    return Outcome{worst <= 1e-3, fmt("max |lambda_k(-8) - sqrt(2k)| = %.3e", worst)};
  });

  criterion(2, "grid vs secular backend", 60, [] {
    double worst = 0.0;
    for (double xi : {-2.0, 0.0, 2.0}) {
      const FiberProblem p{1.0, xi};
      std::vector<double> lv;
      for (const auto& e : solve_fiber_grid(p, 6))
        if (std::abs(e.lambda) > kSecularZeroGap) lv.push_back(e.lambda);
      std::sort(lv.begin(), lv.end(), [](double a, double c) { return std::abs(a) < std::abs(c); });
      lv.resize(4);
      for (double l : lv) {
        const auto s = solve_fiber_secular(p, {l - 1e-3, l + 1e-3});
        if (s.size() != 1) return Outcome{false, "secular backend missed a level"};
        worst = std::max(worst, std::abs(s[0] - l));
      }
    }
    return Outcome{worst <= 1e-6, fmt("max difference %.3e", worst)};
  });

  criterion(3, "Hellmann-Feynman velocity", 30, [] {
    const double h = 1e-3;
    double worst = 0.0;
    for (double b : {0.5, 1.0, 2.0}) {
      const double sb = std::sqrt(b);
      const std::pair<double, int> cases[] = {{-1.0 * sb, -1}, {0.0, 0}, {1.0 * sb, 1}};
      for (auto [xi, k] : cases) {
        const double l0 = labelled_level(b, xi, k);
        const auto e = isolated(b, xi, l0);
        const double fd = (isolated(b, xi + h, l0).lambda - isolated(b, xi - h, l0).lambda) / (2.0 * h);
        worst = std::max(worst, std::abs(hf_velocity(e) - fd));
      }
    }
    return Outcome{worst <= 1e-5, fmt("max |v_HF - v_FD| = %.3e over 9 cases", worst)};
  });

  // criteria 4, 5 and 7 share the two full reports
  std::vector<CorrespondenceReport> reports;
  double report_seconds = 0.0;
  {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      for (const auto& isl : {SpectralIsland(0, 0), SpectralIsland(0, 1)}) reports.push_back(bulk_edge_report(isl, 1.0));
    } catch (const std::exception& e) {
      std::printf("bulk-edge reports failed: %s\n", e.what());
    }
    report_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  const bool have_reports = reports.size() == 2;

  criterion(4, "bulk-edge correspondence", 0, [&] {
    if (!have_reports) return Outcome{false, "reports unavailable"};
    double worst = 0.0;
    std::string d;
    for (size_t i = 0; i < 2; ++i) {
      const auto& r = reports[i];
      const double expected = (i + 1) * unit;
      worst = std::max({worst, r.edge_vs_levels, std::abs(r.level_sum - expected) / unit});
      d += fmt(i ? ", {0,1}: %.9f" : "{0}: %.9f", r.edge_value);
    }
    d += fmt("; max rel err %.3e", worst) + fmt("; both reports %.0f s", report_seconds);
    return Outcome{worst <= 1e-3 && report_seconds <= 300.0, d};
  });

  criterion(5, "edge current = d bulk / db", 0, [&] {
    if (!have_reports) return Outcome{false, "reports unavailable"};
    const double worst = std::max(reports[0].abs_err, reports[1].abs_err);
    return Outcome{worst <= 1e-3, fmt("max |edge - dB/db| = %.3e", worst)};
  });

  criterion(6, "Streda slope", 1, [] {
    double worst_n = 0.0, worst_res = 0.0;
    for (int n = 1; n <= 3; ++n) {
      const auto s = streda_slope(SpectralIsland(0, n - 1), {0.8, 0.9, 1.0, 1.1, 1.2});
      worst_n = std::max(worst_n, std::abs(s.chern_estimate - n));
      worst_res = std::max(worst_res, s.residual);
    }
    return Outcome{worst_n <= 1e-9 && worst_res <= 1e-12,
                   fmt("max |2 pi slope - N| = %.2e", worst_n) + fmt(", fit residual %.2e", worst_res)};
  });

  criterion(7, "spectral flow", 0, [&] {
    if (!have_reports) return Outcome{false, "reports unavailable"};
    const bool ok = reports[0].flow_above == 1 && reports[1].flow_above == 2 && reports[0].flow_below == 0 &&
                    reports[1].flow_below == 0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "flow above N=1: %d, N=2: %d; at lambda_bar/2 = %.4f: %d", reports[0].flow_above,
                  reports[1].flow_above, reports[0].flow_below_energy, reports[0].flow_below);
    return Outcome{ok, buf};
  });

  criterion(8, "zero-mode Chern integral", 120, [] {
    const auto ch = chern_zero_mode(1.0);
    const auto s = streda_slope(SpectralIsland(0, 0), {0.9, 1.0, 1.1});
    const double e1 = std::abs(ch.value - 1.0), e2 = std::abs(ch.value - s.chern_estimate);
    return Outcome{e1 <= 1e-3 && e2 <= 2e-3, fmt("Ch = %.12f", ch.value) + fmt(", |Ch - 2 pi slope| = %.2e", e2)};
  });

  criterion(9, "Dirac residual of kernels", 10, [] {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u1(-2.0, 2.0), u2(0.2, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      PlanePoint x{u1(rng), u2(rng)}, xp{u1(rng), u2(rng)};
      if (norm(x - xp) < 0.2) xp.x2 += 0.5;
      for (double s : {1.0, 2.0})
        for (auto kind : {KernelKind::free, KernelKind::edge})
          worst = std::max(worst, dirac_residual(kind, x, xp, SpectralParameter(s), 1e-4));
    }
    return Outcome{worst <= 1e-6, fmt("max relative residual %.3e", worst)};
  });

  criterion(10, "boundary rows of edge kernel", 5, [] {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u1(-2.0, 2.0), u2(0.01, 2.0), us(0.5, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const SpinorMatrix k = edge_kernel_b0({u1(rng), 0.0}, {u1(rng), u2(rng)}, SpectralParameter(us(rng)));
      worst = std::max(worst, (k.row(0) - k.row(1)).cwiseAbs().maxCoeff() / k.cwiseAbs().maxCoeff());
    }
    return Outcome{worst <= 1e-12, fmt("max row defect %.3e", worst)};
  });

  criterion(11, "Schur bound scaling of T", 60, [] {
    const double a = schur_norm(KernelKind::dressed_T, 1.0, SpectralParameter(10.0)).value;
    const double c = schur_norm(KernelKind::dressed_T, 1.0, SpectralParameter(20.0)).value;
    const double half = schur_norm(KernelKind::dressed_T, 0.5, SpectralParameter(10.0)).value;
    const double ratio = c / a, lin = std::abs(a / half - 2.0);
    return Outcome{std::abs(ratio / 0.25 - 1.0) <= 0.1 && lin <= 1e-6,
                   fmt("ratio 100->400 = %.4f", ratio) + fmt(", |T(b=1)/T(b=1/2) - 2| = %.2e", lin)};
  });

  criterion(12, "special functions", 5, [] {
    auto k0 = quad::integrate([](double s) { return std::exp(-std::cosh(s)); }, 0.0, 8.0, 1e-15, 1e-14);
    auto k1 = quad::integrate([](double s) { return -std::cosh(s) * std::exp(-std::cosh(s)); }, 0.0, 8.0, 1e-15,
                              1e-14);
    const double e0 = std::abs(macdonald_k0(1.0).value - k0.value);
    const double e1 = std::abs(macdonald_k0_prime(1.0).value - k1.value);
    double eu = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double z = -4.0 + 12.0 * i / 99.0, ref = std::exp(-0.25 * z * z);
      eu = std::max(eu, std::abs(parabolic_cylinder_u(-0.5, z).value - ref) / ref);
    }
    return Outcome{e0 <= 1e-10 && e1 <= 1e-10 && eu <= 1e-12,
                   fmt("K0 %.1e", e0) + fmt(", K0' %.1e", e1) + fmt(", U(-1/2,z) rel %.1e", eu)};
  });

  criterion(13, "Helffer-Sjostrand calculus", 120, [] {
    const FiberProblem p{1.0, 0.0};
    const Eigen::MatrixXd a = fiber_matrix(p, GridSpec::min_box(p, 3.0), 64).dense();
    const auto f = make_gap_function(SpectralIsland(0, 0), 1.0);
    HsOptions o;
    o.tolerance = 1e-6;
    const auto r3 = hs_matrix_function(a, f, 3, o);
    const auto r5 = hs_matrix_function(a, f, 5, o);
    const double e = (r3.value - spectral_apply(a, f)).cwiseAbs().maxCoeff();
    const double d = (r3.value - r5.value).cwiseAbs().maxCoeff();
    char buf[160];
    std::snprintf(buf, sizeof buf, "dim %ld: |HS - eig| = %.2e, |N3 - N5| = %.2e", static_cast<long>(a.rows()), e, d);
    return Outcome{e <= 1e-4 && d <= 1e-5, buf};
  });

  criterion(14, "edge gap", 0, [] {
    const auto g1 = edge_gap_estimate(1.0), g4 = edge_gap_estimate(4.0);
    const bool inside = g1.lambda_bar > -std::sqrt(2.0) && g1.lambda_bar < 0.0;
    const double scaling = std::abs(g4.lambda_bar / g1.lambda_bar - 2.0);
    // no eigenvalue of any fiber in (lambda_bar + 1e-6, -1e-6)
    int found = 0;
    std::vector<double> xis{g1.xi_star};
    for (double xi = -8.0; xi <= 4.0 + 1e-9; xi += 0.1) xis.push_back(xi);
    for (double xi : xis) found += static_cast<int>(solve_fiber_window({1.0, xi}, {g1.lambda_bar + 1e-6, -1e-6}).size());
    char buf[200];
    std::snprintf(buf, sizeof buf, "lambda_bar = %.10f, eigenvalues in gap: %d over %zu fibers, |ratio - 2| = %.2e",
                  g1.lambda_bar, found, xis.size(), scaling);
    return Outcome{inside && found == 0 && scaling <= 1e-6, buf};
  });

  std::printf("%s: %d of 14 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
