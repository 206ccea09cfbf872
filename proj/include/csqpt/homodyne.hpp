#pragma once

// Homodyne detection model: quadrature statistics, synthetic data, and binned POVMs.
//
// The local-oscillator phase theta measures X_theta = (a e^{-i theta} + a^dagger e^{i theta}) / 2,
// so p(x | theta) = sum_mn rho[m][n] e^{i(n-m) theta} psi_m(x) psi_n(x) and a coherent
// state |alpha> gives mean |alpha| cos(theta - arg alpha).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "csqpt/errors.hpp"
#include "csqpt/fock.hpp"
#include "csqpt/quadrature.hpp"
#include "csqpt/wavefunction.hpp"

namespace csqpt {

struct QuadratureSample {
  double theta = 0.0;
  double x = 0.0;

  bool operator==(const QuadratureSample&) const = default;
};

struct QuadratureDataset {
  std::vector<QuadratureSample> samples;
  Complex probe_alpha = 0.0;
  std::uint64_t seed = 0;
};

/// Throws PreconditionError unless every sample has theta in [0, 2pi) and finite x.
inline void check_dataset(const QuadratureDataset& ds) {
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    if (!(s.theta >= 0.0 && s.theta < kTwoPi) || !std::isfinite(s.x))
      throw PreconditionError("invalid quadrature sample at index " + std::to_string(i));
  }
}

/// Centre phase of section p when [0, 2pi) is split into `sections` equal parts.
inline double section_phase(int p, int sections) { return (p + 0.5) * kTwoPi / sections; }

/// Section containing phase `theta`.
inline int phase_section(double theta, int sections) {
  const int p = static_cast<int>(std::floor(theta / kTwoPi * sections));
  return std::clamp(p, 0, sections - 1);
}

namespace detail {

/// M[m][n] = rho[m][n] e^{i(n-m) theta}; p(x|theta) = psi^T Re(M) psi for real psi.
inline RMatrix rotated_real_part(const DensityMatrix& rho, double theta) {
  const int d = rho.dim();
  RMatrix out(d, d);
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n) out(m, n) = (rho(m, n) * std::polar(1.0, (n - m) * theta)).real();
  return out;
}

inline double pdf_from_form(const RMatrix& form, const double* psi) {
  const int d = static_cast<int>(form.rows());
  double p = 0.0;
  for (int m = 0; m < d; ++m) {
    double row = 0.0;
    for (int n = 0; n < d; ++n) row += form(m, n) * psi[n];
    p += psi[m] * row;
  }
  return p;
}

inline double clamp_probability(double p) {
  if (p < -1e-12) throw InvariantError("negative quadrature probability density; state is not PSD");
  return std::max(p, 0.0);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw; identical on every platform.
inline double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace detail

/// Probability density of quadrature outcome x at local-oscillator phase theta.
inline double quadrature_pdf(const DensityMatrix& rho, double theta, double x) {
  const auto psi = quadrature_wavefunctions(x, rho.dim());
  return detail::clamp_probability(detail::pdf_from_form(detail::rotated_real_part(rho, theta), psi.data()));
}

/// Settings of the tabulated inverse-CDF sampler.
struct SamplerTable {
  double x_min = -6.0;
  double x_max = 6.0;
  double step = 1e-3;
};

/// Draws `n_samples` homodyne outcomes. Sample i is taken at the centre phase of section
/// floor(i * P / n); x comes from inverting a tabulated CDF of quadrature_pdf.
/// The generator is std::mt19937_64 seeded with `seed`; its 53 high bits give each uniform.
inline QuadratureDataset sample_dataset(const DensityMatrix& rho, int phase_sections, std::int64_t n_samples,
                                        std::uint64_t seed, Complex probe_alpha = 0.0,
                                        const SamplerTable& table = {}) {
  if (phase_sections < 1) throw PreconditionError("phase_sections must be at least 1");
  if (n_samples < 1) throw PreconditionError("n_samples must be at least 1");
  check_state(rho);

  const int d = rho.dim();
  const int points = static_cast<int>(std::lround((table.x_max - table.x_min) / table.step)) + 1;
  const double h = (table.x_max - table.x_min) / (points - 1);
  std::vector<double> xs(points);
  std::vector<double> psi(static_cast<std::size_t>(points) * d);
  for (int i = 0; i < points; ++i) {
    xs[i] = table.x_min + i * h;
    quadrature_wavefunctions(xs[i], d, psi.data() + static_cast<std::size_t>(i) * d);
  }

  QuadratureDataset ds;
  ds.samples.resize(static_cast<std::size_t>(n_samples));
  ds.probe_alpha = probe_alpha;
  ds.seed = seed;

  std::mt19937_64 gen(seed);
  std::vector<double> cdf(points);
  std::int64_t next = 0;
  for (int p = 0; p < phase_sections; ++p) {
    // First index whose section is p, i.e. ceil(p * n / P).
    const std::int64_t end = ((p + 1) * n_samples + phase_sections - 1) / phase_sections;
    if (next >= end) continue;
    const double theta = section_phase(p, phase_sections);
    const RMatrix form = detail::rotated_real_part(rho, theta);
    double prev = detail::clamp_probability(detail::pdf_from_form(form, psi.data()));
    cdf[0] = 0.0;
    for (int i = 1; i < points; ++i) {
      const double cur =
          detail::clamp_probability(detail::pdf_from_form(form, psi.data() + static_cast<std::size_t>(i) * d));
      cdf[i] = cdf[i - 1] + 0.5 * h * (prev + cur);
      prev = cur;
    }
    const double total = cdf.back();
    for (; next < end; ++next) {
      const double target = detail::unit_uniform(gen) * total;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
      const auto hi = static_cast<int>(std::clamp<std::ptrdiff_t>(it - cdf.begin(), 1, points - 1));
      const int lo = hi - 1;
      const double span = cdf[hi] - cdf[lo];
      const double frac = span > 0.0 ? (target - cdf[lo]) / span : 0.5;
      ds.samples[next] = {theta, xs[lo] + frac * h};
    }
  }
  return ds;
}

/// Binned homodyne measurement: operator(p, b) = e^{i(m-n) theta_p} \int_bin psi_m psi_n dx / P,
/// so that Tr[operator(p, b) rho] is the joint probability of section p and bin b under a
/// uniform phase schedule.
class HomodynePovm {
 public:
  HomodynePovm() = default;
  HomodynePovm(int phase_sections, std::vector<double> x_edges, int dim, std::vector<RMatrix> bin_overlaps)
      : sections_(phase_sections), edges_(std::move(x_edges)), dim_(dim), overlaps_(std::move(bin_overlaps)) {
    operators_.reserve(static_cast<std::size_t>(sections_) * bins());
    for (int p = 0; p < sections_; ++p) {
      const double theta = section_phase(p, sections_);
      for (int b = 0; b < bins(); ++b) {
        CMatrix op(dim_, dim_);
        for (int m = 0; m < dim_; ++m)
          for (int n = 0; n < dim_; ++n)
            op(m, n) = std::polar(overlaps_[b](m, n) / sections_, (m - n) * theta);
        operators_.push_back(std::move(op));
      }
    }
  }

  int phase_sections() const { return sections_; }
  int bins() const { return static_cast<int>(edges_.size()) - 1; }
  int dim() const { return dim_; }
  std::size_t outcomes() const { return operators_.size(); }
  const std::vector<double>& x_edges() const { return edges_; }

  /// Flat outcome index p * bins() + b.
  const CMatrix& op(int p, int b) const { return operators_[static_cast<std::size_t>(p) * bins() + b]; }
  const CMatrix& op(std::size_t j) const { return operators_[j]; }

  /// \int_bin psi_m psi_n dx.
  const RMatrix& bin_overlap(int b) const { return overlaps_[b]; }

  /// Bin containing x, or -1 outside [front, back). The last edge is inclusive.
  int bin_of(double x) const {
    if (x < edges_.front() || x > edges_.back()) return -1;
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    return std::min(static_cast<int>(it - edges_.begin()) - 1, bins() - 1);
  }

  /// Tr(op_j rho) for every outcome j.
  std::vector<double> probabilities(const CMatrix& rho) const {
    std::vector<double> out(operators_.size());
    for (std::size_t j = 0; j < operators_.size(); ++j)
      out[j] = (operators_[j].cwiseProduct(rho.transpose())).sum().real();
    return out;
  }

  /// Largest eigenvalue of I - P sum_b op(p, b) over sections, restricted to Fock levels
  /// below `levels` (the missing probability mass outside the bin range).
  double completeness_deficit(int levels) const {
    double worst = 0.0;
    for (int p = 0; p < sections_; ++p) {
      CMatrix sum = CMatrix::Zero(levels, levels);
      for (int b = 0; b < bins(); ++b) sum += op(p, b).topLeftCorner(levels, levels);
      const CMatrix gap = CMatrix::Identity(levels, levels) - sections_ * sum;
      Eigen::SelfAdjointEigenSolver<CMatrix> es(linalg::hermitian_part(gap), Eigen::EigenvaluesOnly);
      worst = std::max(worst, es.eigenvalues().maxCoeff());
    }
    return worst;
  }

 private:
  int sections_ = 0;
  std::vector<double> edges_;
  int dim_ = 0;
  std::vector<RMatrix> overlaps_;
  std::vector<CMatrix> operators_;
};

/// Builds the binned POVM; bin overlaps by adaptive Gauss-Kronrod to 1e-10 absolute.
inline HomodynePovm build_povm(int phase_sections, const std::vector<double>& x_edges, int dim) {
  if (phase_sections < 1) throw PreconditionError("phase_sections must be at least 1");
  if (dim < 1) throw PreconditionError("dimension must be positive");
  if (x_edges.size() < 2) throw EdgeOrderError("need at least two bin edges");
  for (std::size_t i = 1; i < x_edges.size(); ++i)
    if (!(x_edges[i] > x_edges[i - 1])) throw EdgeOrderError("bin edges must be strictly increasing");

  const int width = dim * (dim + 1) / 2;
  std::vector<double> psi(dim);
  VectorGaussKronrod quad(
      [&](double x, double* out) {
        quadrature_wavefunctions(x, dim, psi.data());
        int idx = 0;
        for (int m = 0; m < dim; ++m)
          for (int n = m; n < dim; ++n) out[idx++] = psi[m] * psi[n];
      },
      width);

  std::vector<RMatrix> overlaps;
  overlaps.reserve(x_edges.size() - 1);
  for (std::size_t b = 0; b + 1 < x_edges.size(); ++b) {
    const auto vals = quad.integrate(x_edges[b], x_edges[b + 1], 1e-10);
    RMatrix g(dim, dim);
    int idx = 0;
    for (int m = 0; m < dim; ++m)
      for (int n = m; n < dim; ++n) {
        g(m, n) = vals[idx];
        g(n, m) = vals[idx];
        ++idx;
      }
    overlaps.push_back(std::move(g));
  }
  return HomodynePovm(phase_sections, x_edges, dim, std::move(overlaps));
}

inline std::vector<double> uniform_edges(double x_min, double x_max, int bins) {
  if (bins < 1 || !(x_max > x_min)) throw EdgeOrderError("invalid uniform binning");
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) e[i] = x_min + (x_max - x_min) * i / bins;
  return e;
}

}  // namespace csqpt
