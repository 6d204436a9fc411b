#pragma once

// Invariant suites behind `dll verify`. Each check records the measured defect,
// its tolerance and the verdict; numerical errors inside a check count as a fail.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dll/correspondence.hpp"
#include "dll/errors.hpp"
#include "dll/fiber.hpp"
#include "dll/funcalc.hpp"
#include "dll/kernels.hpp"
#include "dll/quadrature.hpp"
#include "dll/specfun.hpp"

namespace dll::verify {

struct Check {
  std::string name;
  double value = 0.0;  // measured defect
  double tolerance = 0.0;
  bool pass = false;
  std::string error;  // diagnostic if the computation itself failed
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
};

namespace detail {

inline void record(SuiteResult& r, const std::string& name, double tol, const std::function<double()>& defect) {
  Check c{name, 0.0, tol, false, {}};
  try {
    c.value = defect();
    c.pass = c.value <= tol;
  } catch (const std::exception& e) {
    c.value = std::numeric_limits<double>::quiet_NaN();
    c.error = e.what();
  }
  r.checks.push_back(std::move(c));
}

inline PlanePoint random_half_plane_point(std::mt19937_64& rng, double x2_min = 0.05) {
  std::uniform_real_distribution<double> u1(-2.0, 2.0), u2(x2_min, 2.0);
  return {u1(rng), u2(rng)};
}

}  // namespace detail

/// K0(1), K0'(1) against their integral representations, and U(-1/2, z) = exp(-z^2/4).
inline SuiteResult specfun_suite() {
  SuiteResult r{"specfun", {}};
  detail::record(r, "macdonald_k0(1) vs integral", 1e-10, [] {
    auto q = quad::integrate([](double t) { return std::exp(-std::cosh(t)); }, 0.0, 8.0, 1e-15, 1e-14);
    return std::abs(macdonald_k0(1.0).value - q.value);
  });
  detail::record(r, "macdonald_k0_prime(1) vs integral", 1e-10, [] {
    auto q = quad::integrate([](double t) { return -std::cosh(t) * std::exp(-std::cosh(t)); }, 0.0, 8.0, 1e-15,
                             1e-14);
    return std::abs(macdonald_k0_prime(1.0).value - q.value);
  });
  detail::record(r, "parabolic_cylinder_u(-1/2, z) = exp(-z^2/4), 100 samples", 1e-12, [] {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double z = -4.0 + 12.0 * i / 99.0;
      const double ref = std::exp(-0.25 * z * z);
      worst = std::max(worst, std::abs(parabolic_cylinder_u(-0.5, z).value - ref) / ref);
    }
    return worst;
  });
  return r;
}

/// Dirac residuals, the boundary row identity, phase composition and the T-kernel Schur scaling.
inline SuiteResult kernels_suite() {
  SuiteResult r{"kernels", {}};
  detail::record(r, "dirac residual, free and edge kernels, 20 pairs", 1e-6, [] {
    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      PlanePoint x = detail::random_half_plane_point(rng, 0.2), xp = detail::random_half_plane_point(rng, 0.2);
      if (norm(x - xp) < 0.2) xp.x2 += 0.5;
      for (double s : {1.0, 2.0})
        for (auto kind : {KernelKind::free, KernelKind::edge})
          worst = std::max(worst, dirac_residual(kind, x, xp, SpectralParameter(s), 1e-4));
    }
    return worst;
  });
  detail::record(r, "edge kernel boundary rows equal, 100 points", 1e-12, [] {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const PlanePoint xp = detail::random_half_plane_point(rng);
      const SpinorMatrix k = edge_kernel_b0({u(rng), 0.0}, xp, SpectralParameter(1.0 + 0.01 * i));
      worst = std::max(worst, (k.row(0) - k.row(1)).norm() / k.norm());
    }
    return worst;
  });
  detail::record(r, "phase composition identity, 100 triples", 1e-12, [] {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const PlanePoint x = detail::random_half_plane_point(rng), y = detail::random_half_plane_point(rng),
                       z = detail::random_half_plane_point(rng);
      const double lhs = landau_phase_phi2(x, y) + landau_phase_phi2(y, z) - landau_phase_phi2(x, z);
      const double rhs = (y.x1 - x.x1) * (y.x2 - z.x2);
      worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
    }
    return worst;
  });
  detail::record(r, "T-kernel Schur norm ratio lambda 100 -> 400 vs 1/4", 0.1, [] {
    const double a = schur_norm(KernelKind::dressed_T, 1.0, SpectralParameter(10.0)).value;
    const double c = schur_norm(KernelKind::dressed_T, 1.0, SpectralParameter(20.0)).value;
    return std::abs(c / a / 0.25 - 1.0);
  });
  return r;
}

/// Landau asymptotes, backend agreement and Hellmann-Feynman velocities.
inline SuiteResult fiber_suite(int jobs = 0) {
  SuiteResult r{"fiber", {}};
  detail::record(r, "asymptotes at xi = -8, k = 0, 1, 2", 1e-3, [] {
    const auto ev = solve_fiber_window({1.0, -8.0}, {-0.5, 2.5});
    double worst = 0.0;
    for (int k = 0; k <= 2; ++k) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& e : ev) best = std::min(best, std::abs(e.lambda - landau_level(k, 1.0)));
      worst = std::max(worst, best);
    }
    return worst;
  });
  detail::record(r, "grid vs secular, 4 smallest |lambda|, xi in {-2, 0, 2}", 1e-6, [] {
    double worst = 0.0;
    for (double xi : {-2.0, 0.0, 2.0}) {
      const FiberProblem p{1.0, xi};
      const auto grid = solve_fiber_grid(p, 4);
      double wmax = 0.0;
      for (const auto& e : grid) wmax = std::max(wmax, std::abs(e.lambda));
      const auto sec = solve_fiber_secular(p, {-wmax - 0.05, wmax + 0.05});
      for (const auto& e : grid) {
        if (std::abs(e.lambda) < kSecularZeroGap) continue;
        double best = std::numeric_limits<double>::infinity();
        for (double s : sec) best = std::min(best, std::abs(s - e.lambda));
        worst = std::max(worst, best);
      }
    }
    return worst;
  });
  detail::record(r, "Hellmann-Feynman vs central difference, b = 1, xi = 0", 1e-5, [] {
    const double h = 1e-3;
    double worst = 0.0;
    for (const auto& e : solve_fiber_grid({1.0, 0.0}, 4)) {
      auto near = [&](double xi) {
        const auto ev = solve_fiber_window({1.0, xi}, {e.lambda - 0.01, e.lambda + 0.01});
        require(ev.size() == 1, "fiber_suite", "level not isolated");
        return ev.front().lambda;
      };
      const double fd = (near(h) - near(-h)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - hf_velocity(e)));
    }
    return worst;
  });
  detail::record(r, "edge gap: lambda_bar in (-sqrt 2, 0) at b = 1", 0.0, [jobs] {
    const auto g = edge_gap_estimate(1.0, jobs);
    return (g.lambda_bar > -std::sqrt(2.0) && g.lambda_bar < 0.0) ? 0.0 : 1.0;
  });
  return r;
}

/// Bulk traces, Streda, functional calculus, the zero-mode Chern integral and a full report.
inline SuiteResult correspondence_suite(int jobs = 0) {
  SuiteResult r{"correspondence", {}};
  const double two_pi = 2.0 * std::numbers::pi;
  detail::record(r, "bulk_trace of exp(-t^2), b = 1, vs coth(1)/2pi", 1e-12, [&] {
    return std::abs(bulk_trace(TestFunction::gaussian(), 1.0, 25) - 1.0 / std::tanh(1.0) / two_pi);
  });
  detail::record(r, "bulk_trace_derivative of exp(-t^2), b = 1, vs closed form", 1e-12, [&] {
    const double q = std::exp(-2.0);
    const double ref = (1.0 / std::tanh(1.0) - 4.0 * q / ((1.0 - q) * (1.0 - q))) / two_pi;
    return std::abs(bulk_trace_derivative(TestFunction::gaussian(), 1.0, 25) - ref);
  });
  detail::record(r, "Streda: 2 pi slope - N, N = 1, 2, 3", 1e-9, [&] {
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
      const auto s = streda_slope(SpectralIsland(0, n - 1), {0.8, 0.9, 1.0, 1.1, 1.2});
      worst = std::max({worst, std::abs(s.chern_estimate - n), s.residual * 1e3});
    }
    return worst;
  });
  detail::record(r, "Helffer-Sjostrand vs eigendecomposition, 6x6", 1e-6, [&] {
    Eigen::MatrixXd a(6, 6);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = nd(rng);
    const TestFunction f = make_gap_function(SpectralIsland(0, 0), 1.0);
    HsOptions o;
    o.jobs = jobs;
    const Eigen::MatrixXd hs = hs_matrix_function(a, f, 3, o).value;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    Eigen::VectorXd fv(6);
    for (int i = 0; i < 6; ++i) fv(i) = f(es.eigenvalues()(i));
    const Eigen::MatrixXd ref = es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().transpose();
    return (hs - ref).cwiseAbs().maxCoeff();
  });
  detail::record(r, "zero-mode Chern integral at b = 1", 1e-3,
                 [&] { return std::abs(chern_zero_mode(1.0, -1.0, jobs).value - 1.0); });
  detail::record(r, "bulk-edge report, island {0}, b = 1", 0.0, [&] {
    ReportOptions o;
    o.jobs = jobs;
    return bulk_edge_report(SpectralIsland(0, 0), 1.0, o).pass ? 0.0 : 1.0;
  });
  return r;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"specfun", "kernels", "fiber", "correspondence"};
  return names;
}

inline std::vector<SuiteResult> run_suites(const std::string& which, int jobs = 0) {
  std::vector<SuiteResult> out;
  auto want = [&](const char* s) { return which == "all" || which == s; };
  if (want("specfun")) out.push_back(specfun_suite());
  if (want("kernels")) out.push_back(kernels_suite());
  if (want("fiber")) out.push_back(fiber_suite(jobs));
  if (want("correspondence")) out.push_back(correspondence_suite(jobs));
  require(!out.empty(), "verify", "unknown suite '" + which + "'");
  return out;
}

}  // namespace dll::verify
