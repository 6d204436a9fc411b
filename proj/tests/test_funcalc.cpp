#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "dll/fiber.hpp"
#include "dll/funcalc.hpp"
#include "dll/jet.hpp"
#include "dll/landau.hpp"

using namespace dll;

namespace {

Eigen::MatrixXd spectral_apply(const Eigen::MatrixXd& a, const TestFunction& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd fv(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) fv(i) = f(es.eigenvalues()(i));
  return es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().transpose();
}

void expect_test_function_invariants(const TestFunction& f) {
  const Interval w = f.window();
  for (int i = 0; i < 1000; ++i) {
    const double t = w.lo + (w.hi - w.lo) * (i + 0.5) / 1000.0;
    const double h = 1e-4;
    const double fd = (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12.0 * h);
    EXPECT_NEAR(f.deriv(t), fd, 1e-8 * std::max(1.0, std::abs(fd))) << "t=" << t;
    if (f.support() && !f.support()->contains(t)) {
      EXPECT_EQ(f(t), 0.0);
    }
    if (f.plateau() && f.plateau()->contains(t)) {
      EXPECT_EQ(f(t), 1.0);
    }
  }
}

}  // namespace

TEST(Jet, ExpAndQuotientDerivatives) {
  using J = Jet<6>;
  const double x0 = 0.3;
  const J x = J::variable(x0);
  const J e = exp(x * x);
  // d^2/dx^2 exp(x^2) = (2 + 4x^2) exp(x^2)
  EXPECT_NEAR(e.derivative(2), (2.0 + 4.0 * x0 * x0) * std::exp(x0 * x0), 1e-13);
  const J q = 1.0 / (1.0 + x);
  for (int k = 0; k <= 6; ++k) EXPECT_NEAR(q[k], std::pow(-1.0, k) / std::pow(1.0 + x0, k + 1), 1e-13);
}

TEST(Mollifier, SmoothstepLimits) {
  EXPECT_EQ(mollifier::smoothstep(-0.1), 0.0);
  EXPECT_EQ(mollifier::smoothstep(1.2), 1.0);
  EXPECT_NEAR(mollifier::smoothstep(0.5), 0.5, 1e-15);
  // all derivatives vanish at the ends of the ramp
  const auto j = mollifier::smoothstep(TaylorJet::variable(1e-3));
  for (int k = 0; k <= kJetOrder; ++k) EXPECT_EQ(j[k], 0.0);
}

TEST(TestFunction, GaussianInvariants) { expect_test_function_invariants(TestFunction::gaussian()); }

TEST(TestFunction, GapFunctionInvariants) {
  for (double b : {0.5, 1.0, 3.0}) {
    expect_test_function_invariants(make_gap_function(SpectralIsland(0, 0), b));
    expect_test_function_invariants(make_gap_function(SpectralIsland(0, 1), b));
    expect_test_function_invariants(make_gap_function(SpectralIsland(-2, 1), b, 0.1));
  }
}

TEST(GapFunction, ZeroIsland) {
  const auto f = make_gap_function(SpectralIsland(0, 0), 1.0);
  EXPECT_TRUE(f.plateau()->contains(0.0));
  EXPECT_GT(f.support()->lo, -std::sqrt(2.0));
  EXPECT_LT(f.support()->hi, std::sqrt(2.0));
  EXPECT_EQ(f(std::sqrt(2.0)), 0.0);
  EXPECT_EQ(f(-std::sqrt(2.0)), 0.0);
}

TEST(GapFunction, TwoLevelIsland) {
  const auto f = make_gap_function(SpectralIsland(0, 1), 1.0);
  EXPECT_TRUE(f.plateau()->contains(0.0));
  EXPECT_TRUE(f.plateau()->contains(std::sqrt(2.0)));
  EXPECT_GT(f.support()->lo, -std::sqrt(2.0));
  EXPECT_LT(f.support()->hi, 2.0);
}

TEST(GapFunction, DerivativeVanishesOnAllLevels) {
  for (const auto& isl : {SpectralIsland(0, 0), SpectralIsland(0, 1), SpectralIsland(1, 3), SpectralIsland(-4, -1)}) {
    const double b = 1.3;
    const auto f = make_gap_function(isl, b);
    for (int k = -20; k <= 20; ++k) {
      const double e = landau_level(k, b);
      EXPECT_EQ(f.deriv(e), 0.0) << isl.to_string() << " k=" << k;
      EXPECT_EQ(f(e), isl.contains(k) ? 1.0 : 0.0);
    }
  }
}

TEST(GapFunction, MarginClearance) {
  const double b = 2.0, m = 0.3;
  const auto f = make_gap_function(SpectralIsland(1, 2), b, m);
  const double g_lo = landau_level(1, b) - landau_level(0, b), g_hi = landau_level(3, b) - landau_level(2, b);
  EXPECT_GE(f.support()->lo - landau_level(0, b), m * g_lo - 1e-14);
  EXPECT_GE(landau_level(3, b) - f.support()->hi, m * g_hi - 1e-14);
}

TEST(GapFunction, RejectsBadArguments) {
  EXPECT_THROW(make_gap_function(SpectralIsland(0, 0), 1.0, 0.5), Error);
  EXPECT_THROW(make_gap_function(SpectralIsland(0, 0), 0.0), Error);
  EXPECT_THROW(SpectralIsland(2, 1), Error);
  EXPECT_THROW(SpectralIsland::from_levels({0, 2}), Error);
}

TEST(AlmostAnalytic, RestrictsToFunctionOnRealAxis) {
  const auto f = make_gap_function(SpectralIsland(0, 1), 1.0);
  const auto fn = almost_analytic_extension(f, 3);
  for (int i = 0; i < 1000; ++i) {
    const double x = -3.0 + 6.0 * i / 999.0;
    EXPECT_NEAR(fn.eval({x, 0.0}).real(), f(x), 1e-12);
    EXPECT_EQ(fn.eval({x, 0.0}).imag(), 0.0);
  }
}

TEST(AlmostAnalytic, SupportedInUnitStrip) {
  const auto fn = almost_analytic_extension(TestFunction::gaussian(), 4);
  for (double y : {1.0001, 1.5, -1.2})
    for (double x : {-1.0, 0.0, 0.7}) {
      EXPECT_EQ(fn.eval({x, y}), cplx(0.0));
      EXPECT_EQ(fn.dbar({x, y}), cplx(0.0));
    }
  EXPECT_EQ(AlmostAnalyticExtension::cutoff(0.5), 1.0);
  EXPECT_EQ(AlmostAnalyticExtension::cutoff(-0.3), 1.0);
  EXPECT_EQ(AlmostAnalyticExtension::cutoff(1.0), 0.0);
}

TEST(AlmostAnalytic, DbarMatchesFiniteDifferences) {
  const auto fn = almost_analytic_extension(make_gap_function(SpectralIsland(0, 0), 1.0), 3);
  const double h = 1e-6;
  for (cplx z : {cplx(0.3, 0.2), cplx(-0.6, 0.7), cplx(0.9, -0.55)}) {
    const cplx d1 = (fn.eval(z + h) - fn.eval(z - h)) / (2.0 * h);
    const cplx d2 = (fn.eval(z + cplx(0, h)) - fn.eval(z - cplx(0, h))) / (2.0 * h);
    const cplx expected = d1 + cplx(0.0, 1.0) * d2;
    EXPECT_NEAR(std::abs(fn.dbar(z) - expected), 0.0, 1e-5 * (1.0 + std::abs(expected)));
  }
}

TEST(AlmostAnalytic, DbarVanishesToOrderN) {
  const auto f = make_gap_function(SpectralIsland(0, 0), 1.0);
  for (int n : {3, 5}) {
    const auto fn = almost_analytic_extension(f, n);
    const double c = fn.estimate_decay_constant(100);
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_GT(c, 0.0);
    // on |z2| <= 1/2 the ratio |dbar| / |z2|^N is bounded by C_N <z1>^{-N}
    for (double y : {1e-3, 1e-2, 0.1})
      for (double x : {-0.9, -0.8, 0.85}) {
        const double bracket = std::sqrt(1.0 + x * x);
        EXPECT_LE(std::abs(fn.dbar({x, y})), c * std::pow(y / bracket, n) * (1.0 + 1e-9));
      }
  }
}

TEST(AlmostAnalytic, OrderLimits) {
  EXPECT_THROW(almost_analytic_extension(TestFunction::gaussian(), 0), Error);
  EXPECT_THROW(almost_analytic_extension(TestFunction::gaussian(), kJetOrder), Error);
}

TEST(HelfferSjostrand, PauliMatrixGaussian) {
  Eigen::MatrixXd s3(2, 2);
  s3 << 1, 0, 0, -1;
  const auto r = hs_matrix_function(s3, TestFunction::gaussian(), 3);
  EXPECT_NEAR(r.value(0, 0), std::exp(-1.0), 1e-4);
  EXPECT_NEAR(r.value(1, 1), std::exp(-1.0), 1e-4);
  EXPECT_NEAR(r.value(0, 1), 0.0, 1e-4);
}

TEST(HelfferSjostrand, OneByOneZero) {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 1);
  EXPECT_NEAR(hs_matrix_function(z, make_gap_function(SpectralIsland(0, 0), 1.0), 3).value(0, 0), 1.0, 1e-4);
}

TEST(HelfferSjostrand, RandomMatrixMatchesSpectralCalculus) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = nd(rng);
  const auto f = make_gap_function(SpectralIsland(0, 1), 1.0);
  const Eigen::MatrixXd ref = spectral_apply(a, f);
  const auto r3 = hs_matrix_function(a, f, 3);
  const auto r5 = hs_matrix_function(a, f, 5);
  EXPECT_LE((r3.value - ref).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((r3.value - r5.value).cwiseAbs().maxCoeff(), 1e-6);
  // commutes with A
  const Eigen::MatrixXd comm = a * r3.value - r3.value * a;
  EXPECT_LE(comm.norm(), 1e-4 * r3.value.norm());
  EXPECT_LE(r3.imag_residual, 1e-8);
}

TEST(HelfferSjostrand, FiberMatrix) {
  const SymTridiagonal t = fiber_matrix({1.0, 0.0}, 8.0, 16);
  const Eigen::MatrixXd a = t.dense();
  const auto f = make_gap_function(SpectralIsland(0, 0), 1.0);
  const auto r = hs_matrix_function(a, f, 3);
  EXPECT_LE((r.value - spectral_apply(a, f)).cwiseAbs().maxCoeff(), 1e-4);
}
