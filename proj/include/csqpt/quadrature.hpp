#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "csqpt/errors.hpp"

namespace csqpt {

/// Adaptive 7/15-point Gauss-Kronrod integration of a vector-valued integrand.
/// `f(x, out)` writes `width` components into `out`. Intervals are bisected until the
/// Gauss/Kronrod difference of every component is below its share of `abs_tol`.
class VectorGaussKronrod {
 public:
  using Integrand = std::function<void(double, double*)>;

  VectorGaussKronrod(Integrand f, int width, int max_depth = 40)
      : f_(std::move(f)), width_(width), max_depth_(max_depth), buf_(width) {}

  std::vector<double> integrate(double a, double b, double abs_tol) {
    std::vector<double> total(width_, 0.0);
    recurse(a, b, abs_tol, 0, total);
    return total;
  }

 private:
  static constexpr std::array<double, 8> kNodes = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> kKronrod = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  // Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
  static constexpr std::array<double, 4> kGauss = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  void rule(double a, double b, std::vector<double>& kron, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::vector<double> gauss(width_, 0.0);
    kron.assign(width_, 0.0);
    auto add = [&](double x, int node) {
      f_(x, buf_.data());
      for (int i = 0; i < width_; ++i) {
        kron[i] += kKronrod[node] * buf_[i];
        if (node % 2 == 1) gauss[i] += kGauss[node / 2] * buf_[i];
      }
    };
    for (int node = 0; node < 7; ++node) {
      add(c - h * kNodes[node], node);
      add(c + h * kNodes[node], node);
    }
    add(c, 7);
    err = 0.0;
    for (int i = 0; i < width_; ++i) {
      kron[i] *= h;
      err = std::max(err, std::abs(kron[i] - h * gauss[i]));
    }
  }

  void recurse(double a, double b, double tol, int depth, std::vector<double>& total) {
    std::vector<double> kron;
    double err = 0.0;
    rule(a, b, kron, err);
    if (err <= tol || depth >= max_depth_) {
      if (err > tol) throw Error("adaptive quadrature did not reach tolerance");
      for (int i = 0; i < width_; ++i) total[i] += kron[i];
      return;
    }
    const double mid = 0.5 * (a + b);
    recurse(a, mid, 0.5 * tol, depth + 1, total);
    recurse(mid, b, 0.5 * tol, depth + 1, total);
  }

  Integrand f_;
  int width_;
  int max_depth_;
  std::vector<double> buf_;
};

}  // namespace csqpt
