#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dll/kernels.hpp"
#include "dll/specfun.hpp"

using namespace dll;

namespace {

PlanePoint random_point(std::mt19937_64& rng, double x2_min) {
  std::uniform_real_distribution<double> u1(-2.0, 2.0), u2(x2_min, 2.0);
  return {u1(rng), u2(rng)};
}

}  // namespace

TEST(LandauPhase, Definition) {
  EXPECT_DOUBLE_EQ(landau_phase_phi2({0.0, 0.0}, {2.0, 3.0}), 6.0);
  EXPECT_DOUBLE_EQ(landau_phase_phi2({1.3, -0.2}, {1.3, -0.2}), 0.0);
}

TEST(LandauPhase, CompositionIdentity) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const PlanePoint x = random_point(rng, -2.0), y = random_point(rng, -2.0), z = random_point(rng, -2.0);
    const double lhs = landau_phase_phi2(x, y) + landau_phase_phi2(y, z);
    const double rhs = landau_phase_phi2(x, z) + (y.x1 - x.x1) * (y.x2 - z.x2);
    EXPECT_NEAR(lhs, rhs, 1e-13 * (1.0 + std::abs(lhs)));
  }
}

TEST(SpectralParameter, RejectsNonPositive) {
  EXPECT_THROW(SpectralParameter(0.0), Error);
  EXPECT_THROW(SpectralParameter(-1.0), Error);
  EXPECT_DOUBLE_EQ(SpectralParameter(3.0).lambda(), 9.0);
}

TEST(FreeKernel, EntriesAlongFirstAxis) {
  const double s = 1.7, r = 0.9;
  const SpinorMatrix k = free_kernel({r, 0.0}, {0.0, 0.0}, SpectralParameter(s));
  const double two_pi = 2.0 * std::numbers::pi;
  EXPECT_NEAR(std::abs(k(0, 0) - cplx(0.0, s * macdonald_k0(s * r).value / two_pi)), 0.0, 1e-15);
  EXPECT_EQ(k(0, 0), k(1, 1));
  const cplx off(0.0, -s * macdonald_k0_prime(s * r).value / two_pi);
  EXPECT_NEAR(std::abs(k(0, 1) - off), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(k(1, 0) - off), 0.0, 1e-15);
}

TEST(FreeKernel, DecaysExponentially) {
  const double s = 2.0;
  const double near = spectral_norm(free_kernel({1.0 / s, 0.0}, {0.0, 0.0}, SpectralParameter(s)));
  const double far = spectral_norm(free_kernel({20.0 / s, 0.0}, {0.0, 0.0}, SpectralParameter(s)));
  EXPECT_LE(far, near * std::exp(-18.0));
}

TEST(FreeKernel, SingularOnDiagonal) {
  EXPECT_THROW(free_kernel({0.5, 0.5}, {0.5, 0.5}, SpectralParameter(1.0)), Error);
}

TEST(EdgeKernel, BoundaryRowsCoincide) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0), us(0.3, 4.0);
  for (int i = 0; i < 100; ++i) {
    const PlanePoint xp = random_point(rng, 0.01);
    const SpinorMatrix k = edge_kernel_b0({u(rng), 0.0}, xp, SpectralParameter(us(rng)));
    EXPECT_LE((pauli::sigma1() * k - k).cwiseAbs().maxCoeff(), 1e-12 * k.cwiseAbs().maxCoeff());
  }
}

TEST(EdgeKernel, BoundaryPointsAreFinite) {
  const SpinorMatrix k = edge_kernel_b0({0.0, 0.0}, {1.0, 0.0}, SpectralParameter(1.0));
  EXPECT_TRUE(k.allFinite());
}

TEST(EdgeKernel, RejectsLowerHalfPlane) {
  EXPECT_THROW(edge_kernel_b0({0.0, -0.1}, {1.0, 1.0}, SpectralParameter(1.0)), Error);
}

TEST(EdgeKernel, DecaysExponentially) {
  const double s = 1.0;
  const double near = spectral_norm(edge_kernel_b0({0.0, 1.0}, {1.0, 1.0}, SpectralParameter(s)));
  const double far = spectral_norm(edge_kernel_b0({0.0, 1.0}, {30.0, 1.0}, SpectralParameter(s)));
  EXPECT_LE(far, near * std::exp(-28.0));
}

TEST(DressedKernels, SAtZeroFieldIsEdgeKernel) {
  const PlanePoint x{0.2, 0.4}, xp{-0.7, 1.3};
  const SpectralParameter s(1.5);
  EXPECT_EQ(dressed_S_kernel(0.0, x, xp, s), edge_kernel_b0(x, xp, s));
}

TEST(DressedKernels, SPhase) {
  const PlanePoint x{0.0, 1.0}, xp{1.0, 2.0};
  const SpectralParameter s(1.0);
  const SpinorMatrix expected = std::polar(1.0, 0.7 * 2.0) * edge_kernel_b0(x, xp, s);
  EXPECT_LE((dressed_S_kernel(0.7, x, xp, s) - expected).norm(), 1e-15 * expected.norm());
}

TEST(DressedKernels, SPreservesNorm) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i) {
    const PlanePoint x = random_point(rng, 0.0), xp = random_point(rng, 0.0);
    const SpectralParameter s(1.2);
    EXPECT_NEAR(spectral_norm(dressed_S_kernel(2.3, x, xp, s)), spectral_norm(edge_kernel_b0(x, xp, s)),
                1e-12 * spectral_norm(edge_kernel_b0(x, xp, s)));
  }
}

TEST(DressedKernels, TVanishesAtEqualHeightsAndZeroField) {
  const SpectralParameter s(1.0);
  EXPECT_EQ(dressed_T_kernel(1.0, {0.0, 0.5}, {1.0, 0.5}, s).norm(), 0.0);
  EXPECT_EQ(dressed_T_kernel(0.0, {0.0, 0.5}, {1.0, 1.5}, s).norm(), 0.0);
}

TEST(DiracResidual, FreeKernelUnitSeparation) {
  EXPECT_LE(dirac_residual(KernelKind::free, {1.0, 0.0}, {0.0, 0.0}, SpectralParameter(2.0), 1e-4), 1e-6);
}

TEST(DiracResidual, RandomPairsBothKernels) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    const PlanePoint x = random_point(rng, 0.2);
    PlanePoint xp = random_point(rng, 0.2);
    if (norm(x - xp) < 0.2) xp.x2 += 0.5;
    for (double s : {1.0, 2.0}) {
      EXPECT_LE(dirac_residual(KernelKind::free, x, xp, SpectralParameter(s), 1e-4), 1e-6);
      EXPECT_LE(dirac_residual(KernelKind::edge, x, xp, SpectralParameter(s), 1e-4), 1e-6);
    }
  }
}

TEST(DiracResidual, SecondOrderInStep) {
  const PlanePoint x{0.4, 0.9}, xp{-0.3, 0.5};
  const double r1 = dirac_residual(KernelKind::edge, x, xp, SpectralParameter(1.0), 1e-3);
  const double r2 = dirac_residual(KernelKind::edge, x, xp, SpectralParameter(1.0), 5e-4);
  EXPECT_NEAR(r1 / r2, 4.0, 0.2);
}

TEST(DiracResidual, Preconditions) {
  EXPECT_THROW(dirac_residual(KernelKind::free, {0.0, 0.0}, {1e-4, 0.0}, SpectralParameter(1.0), 1e-4), Error);
  EXPECT_THROW(dirac_residual(KernelKind::free, {0.0, 0.0}, {1.0, 0.0}, SpectralParameter(1.0), 1e-2), Error);
  EXPECT_THROW(dirac_residual(KernelKind::dressed_S, {0.0, 0.0}, {1.0, 0.0}, SpectralParameter(1.0), 1e-4), Error);
}

TEST(SchurNorm, TScalesInverselyWithLambda) {
  const double a = schur_norm(KernelKind::dressed_T, 1.0, SpectralParameter(10.0)).value;
  const double c = schur_norm(KernelKind::dressed_T, 1.0, SpectralParameter(20.0)).value;
  EXPECT_NEAR(c / a, 0.25, 0.025);
}

TEST(SchurNorm, TLinearInField) {
  const double a = schur_norm(KernelKind::dressed_T, 1.0, SpectralParameter(3.0)).value;
  const double c = schur_norm(KernelKind::dressed_T, 0.5, SpectralParameter(3.0)).value;
  EXPECT_NEAR(a / c, 2.0, 1e-6);
}

TEST(SchurNorm, SDecaysLikeInverseSqrtLambda) {
  const double a = schur_norm(KernelKind::dressed_S, 1.0, SpectralParameter(10.0)).value;
  const double c = schur_norm(KernelKind::dressed_S, 1.0, SpectralParameter(20.0)).value;
  EXPECT_NEAR(c / a, 0.5, 0.5 * 0.15);
}

TEST(SchurNorm, RejectsUnsupportedKernels) {
  EXPECT_THROW(schur_norm(KernelKind::free, 1.0, SpectralParameter(1.0)), Error);
}
