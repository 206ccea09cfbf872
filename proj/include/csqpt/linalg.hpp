#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace csqpt {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

namespace linalg {

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

/// Largest |m - m^dagger| entry.
inline double hermiticity_defect(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Applies a real function to the spectrum of a Hermitian matrix.
inline CMatrix spectral_map(const CMatrix& h, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  const RVector mapped = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * mapped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

/// Square root of a positive semidefinite matrix; negative rounding noise in the spectrum is clipped.
inline CMatrix psd_sqrt(const CMatrix& h) {
  return spectral_map(h, [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

/// Inverse square root with the spectrum floored at `floor`.
inline CMatrix psd_inv_sqrt(const CMatrix& h, double floor) {
  return spectral_map(h, [floor](double v) { return 1.0 / std::sqrt(std::max(v, floor)); });
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 of two positive semidefinite matrices.
inline double uhlmann_fidelity(const CMatrix& a, const CMatrix& b) {
  const CMatrix sa = psd_sqrt(a);
  const CMatrix inner = hermitian_part(sa * b * sa);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(inner, Eigen::EigenvaluesOnly);
  double tr = 0.0;
  for (double v : es.eigenvalues()) tr += std::sqrt(std::max(v, 0.0));
  return tr * tr;
}

/// log(n choose k) through lgamma; exact enough for dimensions far beyond 64.
inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(log_binomial(n, k));
}

inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

}  // namespace linalg
}  // namespace csqpt
