#pragma once

// Interpretation of process tensors: photon-number transfer, loss and phase fits, fidelities.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "csqpt/errors.hpp"
#include "csqpt/fock.hpp"
#include "csqpt/wigner.hpp"

namespace csqpt {

inline constexpr double kPhaseMagFloor = 0.02;

/// M[k][m] = Re e[k][k][m][m]: probability that m input photons leave as k.
/// Throws InvariantError if an element has |Im| above `imag_tol`.
inline RMatrix diagonal_block(const ProcessTensor& t, double imag_tol = 1e-3) {
  const int d = t.dim();
  RMatrix out(d, d);
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m) {
      const Complex v = t(k, k, m, m);
      if (std::abs(v.imag()) > imag_tol)
        throw InvariantError("diagonal tensor element has imaginary part " + std::to_string(v.imag()));
      out(k, m) = v.real();
    }
  return out;
}

/// Binomial(m, eta) photon-number transfer matrix of a pure loss channel.
inline RMatrix binomial_transfer(double eta, int dim) {
  RMatrix out = RMatrix::Zero(dim, dim);
  for (int m = 0; m < dim; ++m)
    for (int k = 0; k <= m; ++k) out(k, m) = linalg::binomial(m, k) * std::pow(eta, k) * std::pow(1.0 - eta, m - k);
  return out;
}

inline double transfer_misfit(const RMatrix& diag, double eta) {
  return (diag - binomial_transfer(eta, static_cast<int>(diag.rows()))).squaredNorm();
}

/// Least-squares transmissivity of a diagonal block, by grid bracketing and golden-section search.
/// Throws DegenerateBlock for blocks smaller than 2x2 or with more than one bracketed minimum.
inline double fit_transmissivity(const RMatrix& diag) {
  if (diag.rows() < 2 || diag.rows() != diag.cols()) throw DegenerateBlock("diagonal block must be at least 2x2");
  auto f = [&](double eta) { return transfer_misfit(diag, eta); };

  constexpr int kGrid = 200;
  std::vector<double> vals(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) vals[i] = f(static_cast<double>(i) / kGrid);
  int best = 0;
  int local_minima = 0;
  for (int i = 0; i <= kGrid; ++i) {
    if (vals[i] < vals[best]) best = i;
    const bool left_ok = i == 0 || vals[i] < vals[i - 1];
    const bool right_ok = i == kGrid || vals[i] < vals[i + 1];
    if (left_ok && right_ok) ++local_minima;
  }
  if (local_minima > 1) throw DegenerateBlock("transmissivity misfit has several minima");

  double lo = std::max(0, best - 1) / static_cast<double>(kGrid);
  double hi = std::min(kGrid, best + 1) / static_cast<double>(kGrid);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - ratio * (hi - lo);
  double b = lo + ratio * (hi - lo);
  double fa = f(a);
  double fb = f(b);
  while (hi - lo > 1e-10) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = f(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = f(b);
    }
  }
  double eta = 0.5 * (lo + hi);
  for (double edge : {0.0, 1.0})
    if (f(edge) <= f(eta)) eta = edge;
  return eta;
}

struct PhaseEntry {
  int m = 0;
  int n = 0;
  double phase = 0.0;  // principal branch, (-pi, pi]
};

/// Phases of e[k][l][m][n] over the phase-symmetric family m - n = k - l, skipping
/// elements with magnitude below `mag_floor`.
inline std::vector<PhaseEntry> phase_map(const ProcessTensor& t, int k, int l, double mag_floor = kPhaseMagFloor) {
  const int d = t.dim();
  if (k == l) throw PreconditionError("phase_map needs an off-diagonal block (k != l)");
  if (k < 0 || l < 0 || k >= d || l >= d) throw PreconditionError("block index outside truncation");
  std::vector<PhaseEntry> out;
  for (int m = 0; m < d; ++m) {
    const int n = m - (k - l);
    if (n < 0 || n >= d) continue;
    const Complex v = t(k, l, m, n);
    if (std::abs(v) >= mag_floor) out.push_back({m, n, std::arg(v)});
  }
  if (out.empty())
    throw EmptyMap("no element of block (" + std::to_string(k) + "," + std::to_string(l) + ") above floor");
  return out;
}

/// Vector average of unit phasors.
inline double circular_mean(const std::vector<PhaseEntry>& entries) {
  Complex s = 0.0;
  for (const auto& e : entries) s += std::polar(1.0, e.phase);
  return std::arg(s);
}

/// RMS distance of the entries from their circular mean (wrapped differences).
inline double phase_spread(const std::vector<PhaseEntry>& entries) {
  const double mean = circular_mean(entries);
  double s = 0.0;
  for (const auto& e : entries) {
    const double diff = std::remainder(e.phase - mean, kTwoPi);
    s += diff * diff;
  }
  return std::sqrt(s / entries.size());
}

struct BlockPhase {
  int k = 0;
  int l = 0;
  double mean = 0.0;
};

struct PhaseFit {
  double phi_hat = 0.0;  // (-pi, pi]
  std::vector<BlockPhase> per_block_means;
  double residual = 0.0;
};

inline double wrap_phase(double phi) {
  double w = std::remainder(phi, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

/// Least-squares fit of block phase = (l - k) phi through the origin.
/// Block means are unwrapped by 2pi multiples toward (l - k) times the phase of the
/// lowest-order block, which leaves them untouched whenever 3 phi < pi.
inline PhaseFit fit_linear_phase(std::vector<BlockPhase> blocks) {
  if (blocks.empty()) throw EmptyMap("no block phases to fit");
  const BlockPhase* base = &blocks.front();
  for (const auto& b : blocks)
    if (std::abs(b.l - b.k) < std::abs(base->l - base->k)) base = &b;
  const double unit = base->mean / (base->l - base->k);
  for (auto& b : blocks) {
    const double predicted = (b.l - b.k) * unit;
    b.mean += kTwoPi * std::round((predicted - b.mean) / kTwoPi);
  }
  double num = 0.0;
  double den = 0.0;
  for (const auto& b : blocks) {
    const double j = b.l - b.k;
    num += j * b.mean;
    den += j * j;
  }
  PhaseFit fit;
  const double phi = num / den;
  double rss = 0.0;
  for (const auto& b : blocks) {
    const double r = b.mean - (b.l - b.k) * phi;
    rss += r * r;
  }
  fit.phi_hat = wrap_phase(phi);
  fit.residual = std::sqrt(rss / blocks.size());
  fit.per_block_means = std::move(blocks);
  return fit;
}

/// Global phase from the circular-mean phases of blocks (0,1), (0,2), (0,3).
inline PhaseFit fit_global_phase(const ProcessTensor& t, double mag_floor = kPhaseMagFloor) {
  if (t.dim() < 4) throw PreconditionError("global phase fit needs dimension >= 4");
  std::vector<BlockPhase> blocks;
  for (int l = 1; l <= 3; ++l) blocks.push_back({0, l, circular_mean(phase_map(t, 0, l, mag_floor))});
  return fit_linear_phase(std::move(blocks));
}

struct ProcessFidelity {
  double full = 0.0;      // Uhlmann fidelity of the unit-trace Choi matrices
  double diagonal = 0.0;  // classical fidelity of the column-normalized diagonal blocks
};

/// Columns rescaled to sum to one (zero columns stay zero).
inline RMatrix column_normalized(RMatrix m) {
  for (int c = 0; c < m.cols(); ++c) {
    m.col(c) = m.col(c).cwiseMax(0.0);
    const double s = m.col(c).sum();
    if (s > 0.0) m.col(c) /= s;
  }
  return m;
}

/// Classical fidelity (sum_{k,m} w_m sqrt(A[k][m] B[k][m]))^2 of two transfer matrices,
/// each column treated as a conditional distribution with equal input weights w_m = 1/D.
inline double transfer_fidelity(const RMatrix& a, const RMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("transfer matrices differ in size");
  const RMatrix an = column_normalized(a);
  const RMatrix bn = column_normalized(b);
  const double w = 1.0 / a.cols();
  double s = 0.0;
  for (int k = 0; k < a.rows(); ++k)
    for (int m = 0; m < a.cols(); ++m) s += w * std::sqrt(an(k, m) * bn(k, m));
  return s * s;
}

inline ProcessFidelity process_fidelity(const ProcessTensor& a, const ProcessTensor& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("process dimensions differ");
  const double d = a.dim();
  ProcessFidelity f;
  f.full = std::clamp(linalg::uhlmann_fidelity(a.choi() / d, b.choi() / d), 0.0, 1.0);
  f.diagonal = std::clamp(transfer_fidelity(diagonal_block(a, 1.0), diagonal_block(b, 1.0)), 0.0, 1.0);
  return f;
}

struct Prediction {
  DensityMatrix state;
  WignerGrid wigner;
};

/// Output state of `t` for `rho_in`. Same as apply_process.
inline DensityMatrix predict_output(const ProcessTensor& t, const DensityMatrix& rho_in) {
  return apply_process(t, rho_in);
}

inline Prediction predict_output(const ProcessTensor& t, const DensityMatrix& rho_in,
                                 const std::vector<double>& x_axis, const std::vector<double>& y_axis) {
  DensityMatrix out = apply_process(t, rho_in);
  WignerGrid grid = wigner(out, x_axis, y_axis);
  return {std::move(out), std::move(grid)};
}

/// Everything the process report shows for one reconstructed tensor.
struct ProcessAnalysis {
  RMatrix diagonal;
  double eta_hat = 0.0;
  std::vector<std::vector<PhaseEntry>> phase_maps;  // blocks (0,1), (0,2), (0,3)
  PhaseFit phase_fit;
  ProcessFidelity vs_model;  // against the loss channel (eta_hat, phi_hat)
  std::optional<ProcessFidelity> vs_reference;
};

inline ProcessAnalysis analyze_process(const ProcessTensor& t, const ProcessTensor* reference = nullptr) {
  ProcessAnalysis a;
  a.diagonal = diagonal_block(t);
  a.eta_hat = fit_transmissivity(a.diagonal);
  for (int l = 1; l <= 3; ++l) a.phase_maps.push_back(phase_map(t, 0, l));
  a.phase_fit = fit_global_phase(t);
  a.vs_model = process_fidelity(t, loss_channel_tensor(ChannelModel(a.eta_hat, a.phase_fit.phi_hat), t.dim()));
  if (reference != nullptr) a.vs_reference = process_fidelity(t, *reference);
  return a;
}

}  // namespace csqpt
