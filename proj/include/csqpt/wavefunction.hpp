#pragma once

#include <cmath>
#include <vector>

#include "csqpt/linalg.hpp"

namespace csqpt {

/// psi_0(x) .. psi_{count-1}(x): oscillator eigenfunctions in the X = (a + a^dagger)/2
/// convention, psi_n(x) = (2/pi)^{1/4} (2^n n!)^{-1/2} H_n(sqrt(2) x) e^{-x^2}.
/// Computed with the normalized Hermite-function recurrence, which stays finite
/// where the bare polynomials would overflow.
inline void quadrature_wavefunctions(double x, int count, double* out) {
  if (count <= 0) return;
  const double u = std::sqrt(2.0) * x;
  out[0] = std::pow(2.0 / kPi, 0.25) * std::exp(-x * x);
  if (count == 1) return;
  out[1] = std::sqrt(2.0) * u * out[0];
  for (int n = 1; n + 1 < count; ++n)
    out[n + 1] = std::sqrt(2.0 / (n + 1)) * u * out[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * out[n - 1];
}

inline std::vector<double> quadrature_wavefunctions(double x, int count) {
  std::vector<double> psi(static_cast<std::size_t>(std::max(count, 0)));
  quadrature_wavefunctions(x, count, psi.data());
  return psi;
}

inline double quadrature_wavefunction(int n, double x) {
  return quadrature_wavefunctions(x, n + 1).back();
}

}  // namespace csqpt
