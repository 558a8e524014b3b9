#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

#include "qrobust/linalg.hpp"
#include "qrobust/random.hpp"
#include "qrobust/spin.hpp"
#include "helpers.hpp"

using namespace qrobust;
using qrobust::testing::random_general;
using qrobust::testing::random_hermitian;

namespace {

// Plain Taylor series, only for modest norms.
ComplexMatrix exp_series(const ComplexMatrix& a, int terms = 80) {
  ComplexMatrix sum = ComplexMatrix::Identity(a.rows(), a.cols());
  ComplexMatrix term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST(ExpmNegIHermitian, ZeroHamiltonianIsIdentity) {
  const auto u = expm_neg_i_hermitian(ComplexMatrix::Zero(2, 2), 1.0);
  EXPECT_LE((u - ComplexMatrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(ExpmNegIHermitian, DiagonalClosedForm) {
  ComplexMatrix h = spin::pauli('z');
  const auto u = expm_neg_i_hermitian(h, std::numbers::pi);
  EXPECT_LE((u + ComplexMatrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(ExpmNegIHermitian, PauliXQuarterTurnMatchesEulerAndSeries) {
  const auto sx = spin::pauli('x');
  const double tau = std::numbers::pi / 2;
  const auto u = expm_neg_i_hermitian(sx, tau);
  const ComplexMatrix euler = std::cos(tau) * ComplexMatrix::Identity(2, 2) - kI * std::sin(tau) * sx;
  EXPECT_LE((u - euler).norm(), 1e-12);
  EXPECT_LE((u - (-kI * sx)).norm(), 1e-12);
  EXPECT_LE((u - exp_series(-kI * tau * sx)).norm(), 1e-12);
}

TEST(ExpmNegIHermitian, RejectsNonHermitian) {
  ComplexMatrix a(2, 2);
  a << 0, 1, 0, 0;
  EXPECT_THROW(expm_neg_i_hermitian(a, 1.0), StructureError);
  EXPECT_THROW(expm_neg_i_hermitian(ComplexMatrix::Zero(2, 3), 1.0), DimensionError);
}

TEST(ExpmNegIHermitian, InverseAndGroupProperties) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 7;
    const auto h = random_hermitian(rng, n, 1.0 + 4.0 * rng.uniform());
    const double a = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(-2.0, 2.0);
    const auto ua = expm_neg_i_hermitian(h, a);
    const auto ub = expm_neg_i_hermitian(h, b);
    EXPECT_TRUE(is_unitary(ua));
    EXPECT_LE((ua * expm_neg_i_hermitian(h, -a) - ComplexMatrix::Identity(n, n)).norm(), 1e-10);
    EXPECT_LE((ua * ub - expm_neg_i_hermitian(h, a + b)).norm(), 1e-10);
  }
}

TEST(ExpmNegIHermitian, MatchesSeriesForRandomHermitian) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = random_hermitian(rng, 4, 3.0);
    EXPECT_LE((expm_neg_i_hermitian(h, 0.8) - exp_series(-kI * 0.8 * h)).norm(), 1e-12);
  }
}

TEST(ExpmPade13, AgreesWithEigenMatrixExponential) {
  Rng rng(5);
  for (double scale : {0.01, 0.3, 2.0, 10.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = random_general(rng, 6, scale);
      const ComplexMatrix reference = a.exp();
      const auto ours = expm_pade13(a);
      EXPECT_LE((ours - reference).norm(), 1e-11 * std::max(1.0, reference.norm()))
          << "scale " << scale;
    }
  }
}

TEST(ExpmPade13, NilpotentBlockIsExact) {
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 1) = Complex(3.0, -1.0);
  ComplexMatrix expected = ComplexMatrix::Identity(2, 2);
  expected(0, 1) = a(0, 1);
  EXPECT_LE((expm_pade13(a) - expected).norm(), 1e-15);
}

TEST(CouplingIntegral, ZeroHamiltonianGivesConstantIntegrand) {
  Rng rng(1);
  const auto b = random_hermitian(rng, 3, 2.0);
  const double dt = 0.4;
  for (auto method : {CouplingMethod::Block, CouplingMethod::Spectral}) {
    const auto x = coupling_integral(ComplexMatrix::Zero(3, 3), b, dt, method);
    EXPECT_LE((x - (-kI * dt * b)).norm(), 1e-14);
  }
}

TEST(CouplingIntegral, ZeroDirectionGivesZero) {
  Rng rng(2);
  const auto h = random_hermitian(rng, 3, 2.0);
  for (auto method : {CouplingMethod::Block, CouplingMethod::Spectral}) {
    EXPECT_EQ(coupling_integral(h, ComplexMatrix::Zero(3, 3), 0.5, method).norm(), 0.0);
  }
}

TEST(CouplingIntegral, PauliCaseMatchesFiniteDifference) {
  const auto h = spin::pauli('z');
  const auto b = spin::pauli('x');
  const double tau = 0.7;
  const double d = 1e-6;
  const ComplexMatrix fd =
      (expm_neg_i_hermitian(h + d * b, tau) - expm_neg_i_hermitian(h - d * b, tau)) / (2 * d);
  EXPECT_LE((coupling_integral(h, b, tau) - fd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(CouplingIntegral, RandomInstancesMatchFiniteDifference) {
  Rng rng(17);
  const double d = 1e-6;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 6;
    const auto h = random_hermitian(rng, n, 5.0 * rng.uniform());
    const auto b = random_hermitian(rng, n, 5.0 * rng.uniform());
    const double tau = rng.uniform();
    const ComplexMatrix fd =
        (expm_neg_i_hermitian(h + d * b, tau) - expm_neg_i_hermitian(h - d * b, tau)) / (2 * d);
    EXPECT_LE((coupling_integral(h, b, tau) - fd).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(CouplingIntegral, BlockAndSpectralRoutesAgree) {
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 7;
    const auto h = random_hermitian(rng, n, 5.0 * rng.uniform());
    const auto b = random_hermitian(rng, n, 5.0 * rng.uniform());
    const double tau = rng.uniform();
    const auto xb = coupling_integral(h, b, tau, CouplingMethod::Block);
    const auto xs = coupling_integral(h, b, tau, CouplingMethod::Spectral);
    worst = std::max(worst, (xb - xs).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(CouplingIntegral, DegenerateSpectrum) {
  // H = c I commutes with B: integral is -i tau e^{-i c tau} B.
  Rng rng(4);
  const auto b = random_hermitian(rng, 4, 1.0);
  const double c = 1.3;
  const double tau = 0.9;
  const ComplexMatrix expected = -kI * tau * std::exp(-kI * c * tau) * b;
  for (auto method : {CouplingMethod::Block, CouplingMethod::Spectral}) {
    const auto x = coupling_integral(c * ComplexMatrix::Identity(4, 4), b, tau, method);
    EXPECT_LE((x - expected).norm(), 1e-13);
  }
}

TEST(CouplingIntegral, Errors) {
  ComplexMatrix nonherm(2, 2);
  nonherm << 0, 1, 0, 0;
  EXPECT_THROW(coupling_integral(spin::pauli('x'), ComplexMatrix::Identity(3, 3), 1.0),
               DimensionError);
  EXPECT_THROW(coupling_integral(nonherm, spin::pauli('x'), 1.0), StructureError);
  EXPECT_THROW(coupling_integral(spin::pauli('x'), nonherm, 1.0), StructureError);
}

TEST(Norms, BasicContracts) {
  for (int n : {1, 2, 5, 8}) {
    EXPECT_NEAR(frobenius_norm(ComplexMatrix::Identity(n, n)), std::sqrt(double(n)), 1e-15);
  }
  EXPECT_NEAR(spectral_norm(spin::pauli('x')), 1.0, 1e-15);
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d.diagonal() << 0.5, -4.0, 2.0;
  EXPECT_NEAR(spectral_norm(d), 4.0, 1e-14);

  const auto u = haar_random_unitary(6, 8);
  const Complex t = trace_inner(u, u);
  EXPECT_NEAR(t.real(), 6.0, 1e-12);
  EXPECT_NEAR(t.imag(), 0.0, 1e-12);
  EXPECT_THROW(trace_inner(u, ComplexMatrix::Identity(5, 5)), DimensionError);
}

TEST(Norms, TraceInnerMatchesDefinition) {
  Rng rng(6);
  const auto a = random_general(rng, 4, 1.0);
  const auto b = random_general(rng, 4, 1.0);
  EXPECT_LE(std::abs(trace_inner(a, b) - (a.adjoint() * b).trace()), 1e-13);
  EXPECT_LE(std::abs(trace_product(a, b) - (a * b).trace()), 1e-13);
}

TEST(Validation, HermitianAndUnitaryTolerances) {
  ComplexMatrix h = spin::pauli('y');
  EXPECT_TRUE(is_hermitian(h));
  h(0, 1) += 1e-9;
  EXPECT_FALSE(is_hermitian(h));
  EXPECT_TRUE(is_unitary(spin::pauli('y')));
  EXPECT_FALSE(is_unitary(2.0 * spin::pauli('y')));
}
