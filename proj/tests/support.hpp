#pragma once

#include <random>
#include <vector>

#include "csqpt/csqpt.hpp"

namespace testing_support {

using namespace csqpt;

/// Random full-rank state G G^dagger / Tr from a complex Ginibre matrix.
inline DensityMatrix random_state(int dim, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  CMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(normal(gen), normal(gen));
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(linalg::hermitian_part(rho));
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// n! as a double by repeated multiplication.
inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Binomial coefficient by the multiplicative formula.
inline double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Kraus operators of the loss channel followed by exp(-i phi n):
// K_j = sum_n sqrt(C(n, j) eta^{n-j} (1-eta)^j) e^{-i phi (n-j)} |n-j><n|.
inline std::vector<CMatrix> loss_kraus(double eta, double phi, int dim) {
  std::vector<CMatrix> ks;
  for (int j = 0; j < dim; ++j) {
    CMatrix k = CMatrix::Zero(dim, dim);
    for (int n = j; n < dim; ++n)
      k(n - j, n) = std::polar(std::sqrt(choose(n, j) * std::pow(eta, n - j) * std::pow(1.0 - eta, j)), -phi * (n - j));
    ks.push_back(k);
  }
  return ks;
}

inline CMatrix kraus_apply(const std::vector<CMatrix>& ks, const CMatrix& rho) {
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ks) out += k * rho * k.adjoint();
  return out;
}

}  // namespace testing_support
