#pragma once

// Wigner functions in the X = (a + a^dagger)/2, Y = (a - a^dagger)/(2i) convention,
// normalized so that the integral over the (X, Y) plane equals Tr rho.

#include <cmath>
#include <vector>

#include "csqpt/errors.hpp"
#include "csqpt/fock.hpp"
#include "csqpt/wavefunction.hpp"

namespace csqpt {

struct WignerGrid {
  std::vector<double> x_axis;
  std::vector<double> y_axis;
  RMatrix values;  // values(i, j) = W(x_axis[i], y_axis[j])

  /// Trapezoidal integral over the grid.
  double integral() const {
    auto weights = [](const std::vector<double>& axis) {
      std::vector<double> w(axis.size(), 0.0);
      for (std::size_t i = 0; i + 1 < axis.size(); ++i) {
        const double h = 0.5 * (axis[i + 1] - axis[i]);
        w[i] += h;
        w[i + 1] += h;
      }
      return w;
    };
    const auto wx = weights(x_axis);
    const auto wy = weights(y_axis);
    double s = 0.0;
    for (std::size_t i = 0; i < x_axis.size(); ++i)
      for (std::size_t j = 0; j < y_axis.size(); ++j) s += wx[i] * wy[j] * values(i, j);
    return s;
  }
};

inline std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return v;
}

/// W(x, y) from the Fock-basis series
/// W_{|m><n|} = (2/pi) (-1)^n sqrt(n!/m!) (2 conj(a))^{m-n} L_n^{(m-n)}(4|a|^2) e^{-2|a|^2}, a = x + iy, m >= n.
inline double wigner_point(const DensityMatrix& rho, double x, double y) {
  const int d = rho.dim();
  const Complex a(x, y);
  const double r2 = std::norm(a);
  const double z = 4.0 * r2;
  const double gauss = (2.0 / kPi) * std::exp(-2.0 * r2);
  const Complex two_conj = 2.0 * std::conj(a);
  double w = 0.0;
  for (int shift = 0; shift < d; ++shift) {
    // Generalized Laguerre L_n^{(shift)}(z) by upward recurrence in n.
    double lag_prev = 0.0;
    double lag = 1.0;
    Complex power = std::pow(two_conj, shift);
    for (int n = 0; n + shift < d; ++n) {
      if (n > 0) {
        const double next = ((2.0 * (n - 1) + 1.0 + shift - z) * lag - (n - 1 + shift) * lag_prev) / n;
        lag_prev = lag;
        lag = next;
      }
      const int m = n + shift;
      const double ratio = std::exp(0.5 * (linalg::log_factorial(n) - linalg::log_factorial(m)));
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      const Complex term = rho(m, n) * (sign * ratio * lag) * power;
      w += (shift == 0 ? term.real() : 2.0 * term.real());
    }
  }
  return gauss * w;
}

/// Wigner function on a rectangular grid. Axes must be strictly increasing.
inline WignerGrid wigner(const DensityMatrix& rho, const std::vector<double>& x_axis,
                         const std::vector<double>& y_axis) {
  auto check_axis = [](const std::vector<double>& axis) {
    if (axis.empty()) throw PreconditionError("empty Wigner axis");
    for (std::size_t i = 1; i < axis.size(); ++i)
      if (!(axis[i] > axis[i - 1])) throw PreconditionError("Wigner axis must be strictly increasing");
  };
  check_axis(x_axis);
  check_axis(y_axis);
  WignerGrid grid{x_axis, y_axis, RMatrix(x_axis.size(), y_axis.size())};
  for (std::size_t i = 0; i < x_axis.size(); ++i)
    for (std::size_t j = 0; j < y_axis.size(); ++j) grid.values(i, j) = wigner_point(rho, x_axis[i], y_axis[j]);
  return grid;
}

/// W(x, y) = (1/pi) \int <x + u/2| rho |x - u/2> e^{-2iyu} du, evaluated by the trapezoidal
/// rule on [-half_width, half_width]. Slow; serves as an independent check of wigner_point.
inline double wigner_point_direct(const DensityMatrix& rho, double x, double y, double step = 0.01,
                                  double half_width = 16.0) {
  const int d = rho.dim();
  const int count = static_cast<int>(std::ceil(half_width / step));
  std::vector<double> psi_a(d);
  std::vector<double> psi_b(d);
  Complex sum = 0.0;
  for (int i = -count; i <= count; ++i) {
    const double u = i * step;
    quadrature_wavefunctions(x + 0.5 * u, d, psi_a.data());
    quadrature_wavefunctions(x - 0.5 * u, d, psi_b.data());
    Complex kernel = 0.0;
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n) kernel += rho(m, n) * psi_a[m] * psi_b[n];
    const double edge = (i == -count || i == count) ? 0.5 : 1.0;
    sum += edge * kernel * std::polar(1.0, -2.0 * y * u);
  }
  return sum.real() * step / kPi;
}

}  // namespace csqpt
