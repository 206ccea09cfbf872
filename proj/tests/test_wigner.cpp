#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace csqpt;
using testing_support::factorial;
using testing_support::random_state;

namespace {

// Physicists' Hermite polynomial by its three-term recurrence.
double hermite(int n, double u) {
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = 2.0 * u;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * u * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double psi_closed_form(int n, double x) {
  return std::pow(2.0 / kPi, 0.25) / std::sqrt(std::pow(2.0, n) * factorial(n)) * hermite(n, std::sqrt(2.0) * x) *
         std::exp(-x * x);
}

}  // namespace

TEST(Wavefunction, ValuesAtOrigin) {
  EXPECT_NEAR(quadrature_wavefunction(0, 0.0), std::pow(2.0 / kPi, 0.25), 1e-15);
  EXPECT_NEAR(quadrature_wavefunction(0, 0.0), 0.8932, 1e-4);
  EXPECT_EQ(quadrature_wavefunction(1, 0.0), 0.0);
}

TEST(Wavefunction, MatchesHermitePolynomialFormula) {
  for (int n = 0; n <= 12; ++n)
    for (double x : {-3.1, -1.0, -0.2, 0.0, 0.45, 1.7, 2.9})
      EXPECT_NEAR(quadrature_wavefunction(n, x), psi_closed_form(n, x), 1e-12) << "n=" << n << " x=" << x;
}

TEST(Wavefunction, Orthonormal) {
  const int count = 11;
  const double h = 1e-3;
  RMatrix gram = RMatrix::Zero(count, count);
  std::vector<double> psi(count);
  for (int i = 0; i <= 12000; ++i) {
    const double x = -6.0 + i * h;
    quadrature_wavefunctions(x, count, psi.data());
    const double w = (i == 0 || i == 12000) ? 0.5 * h : h;
    for (int m = 0; m < count; ++m)
      for (int n = 0; n < count; ++n) gram(m, n) += w * psi[m] * psi[n];
  }
  EXPECT_LT((gram - RMatrix::Identity(count, count)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Wavefunction, StaysFiniteForHighOrders) {
  for (double x : {-9.0, 0.3, 9.0}) {
    const auto psi = quadrature_wavefunctions(x, 64);
    for (double v : psi) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Wigner, VacuumAndFockValuesAtOrigin) {
  EXPECT_NEAR(wigner_point(fock_density(0, 4), 0.0, 0.0), 2.0 / kPi, 1e-14);
  EXPECT_NEAR(wigner_point(fock_density(1, 4), 0.0, 0.0), -2.0 / kPi, 1e-14);
  EXPECT_NEAR(wigner_point(fock_density(2, 4), 0.0, 0.0), 2.0 / kPi, 1e-14);
}

TEST(Wigner, CoherentStateIsDisplacedGaussian) {
  const Complex alpha = std::polar(0.825, 0.6);
  const auto rho = coherent_density(alpha, 20);
  for (double x : {-0.5, 0.2, 0.66, 1.2})
    for (double y : {-0.3, 0.0, 0.5}) {
      const double expected = (2.0 / kPi) * std::exp(-2.0 * std::norm(Complex(x, y) - alpha));
      EXPECT_NEAR(wigner_point(rho, x, y), expected, 1e-12);
    }
}

TEST(Wigner, SeriesMatchesDirectIntegral) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 3; ++trial) {
    const auto rho = random_state(6, gen);
    for (double x : {-1.1, 0.0, 0.7})
      for (double y : {-0.4, 0.25, 1.3})
        EXPECT_NEAR(wigner_point(rho, x, y), wigner_point_direct(rho, x, y), 1e-8);
  }
}

TEST(Wigner, BoundedAndNormalized) {
  std::mt19937_64 gen(5);
  const auto rho = random_state(7, gen);
  const auto axis = linspace(-5.0, 5.0, 201);
  const auto grid = wigner(rho, axis, axis);
  EXPECT_LE(grid.values.cwiseAbs().maxCoeff(), 2.0 / kPi + 1e-12);
  EXPECT_NEAR(grid.integral(), 1.0, 1e-6);
}

TEST(Wigner, RejectsUnorderedAxis) {
  const auto rho = fock_density(0, 2);
  EXPECT_THROW(wigner(rho, {0.0, 0.0}, {0.0}), PreconditionError);
  EXPECT_THROW(wigner(rho, {}, {0.0}), PreconditionError);
}
