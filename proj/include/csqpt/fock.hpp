#pragma once

// Truncated Fock-space states and processes, and the lossy phase channel.
//
// A process tensor e[k][l][m][n] = <k| E(|m><n|) |l> is stored through its
// Choi matrix C[(k,m),(l,n)] = e[k][l][m][n] with row index k*D + m. The
// channel acts as rho_out[k][l] = sum_mn e[k][l][m][n] rho_in[m][n].

#include <cmath>
#include <string>
#include <utility>

#include "csqpt/errors.hpp"
#include "csqpt/linalg.hpp"

namespace csqpt {

inline constexpr double kHermitianTol = 1e-9;
inline constexpr double kStatePsdTol = 1e-9;
inline constexpr double kStateTraceTol = 1e-6;
inline constexpr double kChoiPsdTol = 1e-6;
inline constexpr double kAnalyticTpTol = 1e-6;
inline constexpr double kReconstructedTpTol = 0.02;

/// Density matrix in the Fock basis |0>..|D-1>. Stored exactly Hermitian.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  /// Takes the Hermitian part of `entries`; throws if it was not Hermitian to 1e-9.
  explicit DensityMatrix(const CMatrix& entries) {
    if (entries.rows() != entries.cols() || entries.rows() == 0)
      throw DimensionMismatch("density matrix must be square and nonempty");
    if (linalg::hermiticity_defect(entries) > kHermitianTol)
      throw InvariantError("density matrix is not Hermitian");
    entries_ = linalg::hermitian_part(entries);
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const CMatrix& matrix() const { return entries_; }
  Complex operator()(int m, int n) const { return entries_(m, n); }

  double trace() const { return entries_.trace().real(); }

  double mean_photon_number() const {
    double n = 0.0;
    for (int m = 0; m < dim(); ++m) n += m * entries_(m, m).real();
    return n;
  }

  /// <a> = Tr(rho a). Its real and imaginary parts are the centre of the Wigner function.
  Complex mean_amplitude() const {
    Complex a = 0.0;
    for (int m = 1; m < dim(); ++m) a += std::sqrt(static_cast<double>(m)) * entries_(m, m - 1);
    return a;
  }

  /// Same state truncated or zero-padded to `new_dim`.
  DensityMatrix resized(int new_dim) const {
    CMatrix out = CMatrix::Zero(new_dim, new_dim);
    const int d = std::min(new_dim, dim());
    out.topLeftCorner(d, d) = entries_.topLeftCorner(d, d);
    return DensityMatrix(out);
  }

 private:
  CMatrix entries_;
};

/// Throws InvariantError unless `rho` is PSD (to -1e-9) with trace within `trace_tol` of one.
inline void check_state(const DensityMatrix& rho, double trace_tol = kStateTraceTol) {
  const double lo = linalg::min_eigenvalue(rho.matrix());
  if (lo < -kStatePsdTol)
    throw InvariantError("density matrix not positive semidefinite (min eigenvalue " +
                         std::to_string(lo) + ")");
  if (std::abs(rho.trace() - 1.0) > trace_tol)
    throw InvariantError("density matrix trace " + std::to_string(rho.trace()) + " outside tolerance");
}

/// Rank-4 process tensor in the Fock basis, backed by its Choi matrix.
class ProcessTensor {
 public:
  ProcessTensor() = default;

  explicit ProcessTensor(const CMatrix& choi) {
    if (choi.rows() != choi.cols()) throw DimensionMismatch("Choi matrix must be square");
    const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(choi.rows()))));
    if (d < 1 || d * d != choi.rows()) throw DimensionMismatch("Choi matrix size is not a perfect square");
    if (linalg::hermiticity_defect(choi) > kHermitianTol)
      throw InvariantError("process tensor violates e[k][l][m][n] = conj(e[l][k][n][m])");
    dim_ = d;
    choi_ = linalg::hermitian_part(choi);
  }

  int dim() const { return dim_; }
  const CMatrix& choi() const { return choi_; }

  static int choi_index(int out, int in, int dim) { return out * dim + in; }

  Complex operator()(int k, int l, int m, int n) const {
    return choi_(choi_index(k, m, dim_), choi_index(l, n, dim_));
  }

  /// max over (m,n) of |sum_k e[k][k][m][n] - delta_mn|.
  double tp_residual() const {
    double worst = 0.0;
    for (int m = 0; m < dim_; ++m)
      for (int n = 0; n < dim_; ++n) {
        Complex s = 0.0;
        for (int k = 0; k < dim_; ++k) s += (*this)(k, k, m, n);
        worst = std::max(worst, std::abs(s - (m == n ? 1.0 : 0.0)));
      }
    return worst;
  }

  double min_choi_eigenvalue() const { return linalg::min_eigenvalue(choi_); }

 private:
  int dim_ = 0;
  CMatrix choi_;
};

/// Throws InvariantError unless `t` is completely positive and trace preserving to `tp_tol`.
inline void check_process(const ProcessTensor& t, double tp_tol = kAnalyticTpTol) {
  const double lo = t.min_choi_eigenvalue();
  if (lo < -kChoiPsdTol)
    throw InvariantError("Choi matrix not positive semidefinite (min eigenvalue " + std::to_string(lo) + ")");
  const double tp = t.tp_residual();
  if (tp > tp_tol) throw InvariantError("trace-preservation residual " + std::to_string(tp) + " exceeds tolerance");
}

/// Beam-splitter loss with transmissivity `eta` followed by a constant phase `phi`.
class ChannelModel {
 public:
  ChannelModel(double eta, double phi) : eta_(eta), phi_(std::fmod(phi, kTwoPi)) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw PreconditionError("transmissivity must lie in [0, 1]");
    if (phi_ < 0.0) phi_ += kTwoPi;
    if (phi_ >= kTwoPi) phi_ = 0.0;
  }

  double eta() const { return eta_; }
  double phi() const { return phi_; }

 private:
  double eta_;
  double phi_;
};

/// Fock amplitudes e^{-|a|^2/2} a^m / sqrt(m!) for m < dim, without renormalization.
inline CVector coherent_amplitudes(Complex alpha, int dim) {
  if (dim < 1) throw PreconditionError("dimension must be positive");
  CVector c = CVector::Zero(dim);
  const double r = std::abs(alpha);
  if (r == 0.0) {
    c(0) = 1.0;
    return c;
  }
  const double arg = std::arg(alpha);
  for (int m = 0; m < dim; ++m) {
    const double log_mag = -0.5 * r * r + m * std::log(r) - 0.5 * linalg::log_factorial(m);
    c(m) = std::polar(std::exp(log_mag), m * arg);
  }
  return c;
}

/// Coherent state |alpha><alpha| truncated to `dim` and renormalized to unit trace.
/// Throws TruncationError when |alpha|^2 > dim/4 or less than 0.999 of the norm fits.
inline DensityMatrix coherent_density(Complex alpha, int dim) {
  if (dim < 1) throw PreconditionError("dimension must be positive");
  if (std::norm(alpha) > dim / 4.0)
    throw TruncationError("coherent amplitude too large for dimension " + std::to_string(dim));
  const CVector c = coherent_amplitudes(alpha, dim);
  const double kept = c.squaredNorm();
  if (kept < 0.999)
    throw TruncationError("coherent state keeps only " + std::to_string(kept) + " of its norm in dimension " +
                          std::to_string(dim));
  return DensityMatrix(c * c.adjoint() / kept);
}

inline DensityMatrix fock_density(int n, int dim) {
  if (n < 0 || n >= dim) throw PreconditionError("Fock index outside truncation");
  CMatrix m = CMatrix::Zero(dim, dim);
  m(n, n) = 1.0;
  return DensityMatrix(m);
}

/// Pure state from (not necessarily normalized) Fock amplitudes.
inline DensityMatrix pure_density(const CVector& amplitudes) {
  const double norm = amplitudes.squaredNorm();
  if (norm <= 0.0) throw PreconditionError("state vector is zero");
  return DensityMatrix(amplitudes * amplitudes.adjoint() / norm);
}

inline DensityMatrix maximally_mixed(int dim) {
  return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

/// e^{i phi n} rho e^{-i phi n}.
inline DensityMatrix phase_rotated(const DensityMatrix& rho, double phi) {
  CMatrix out = rho.matrix();
  for (int m = 0; m < rho.dim(); ++m)
    for (int n = 0; n < rho.dim(); ++n) out(m, n) *= std::polar(1.0, (m - n) * phi);
  return DensityMatrix(out);
}

inline ProcessTensor identity_tensor(int dim) {
  CMatrix choi = CMatrix::Zero(dim * dim, dim * dim);
  for (int m = 0; m < dim; ++m)
    for (int n = 0; n < dim; ++n)
      choi(ProcessTensor::choi_index(m, m, dim), ProcessTensor::choi_index(n, n, dim)) = 1.0;
  return ProcessTensor(choi);
}

/// Choi of the completely depolarizing channel, rho -> Tr(rho) I / D.
inline ProcessTensor depolarizing_tensor(int dim) {
  return ProcessTensor(CMatrix::Identity(dim * dim, dim * dim) / static_cast<double>(dim));
}

/// Analytic tensor of the loss channel:
/// e[k][l][m][n] = sqrt(C(m,k) C(n,l)) eta^{(k+l)/2} (1-eta)^{m-k} e^{i(l-k)phi}
/// for m-k = n-l >= 0, zero elsewhere.
inline ProcessTensor loss_channel_tensor(const ChannelModel& model, int dim) {
  if (dim < 1) throw PreconditionError("dimension must be positive");
  const double eta = model.eta();
  CMatrix choi = CMatrix::Zero(dim * dim, dim * dim);
  for (int m = 0; m < dim; ++m)
    for (int n = 0; n < dim; ++n)
      for (int k = 0; k <= m; ++k) {
        const int l = n - (m - k);
        if (l < 0) continue;
        const double mag = std::exp(0.5 * (linalg::log_binomial(m, k) + linalg::log_binomial(n, l))) *
                           std::pow(eta, 0.5 * (k + l)) * std::pow(1.0 - eta, m - k);
        choi(ProcessTensor::choi_index(k, m, dim), ProcessTensor::choi_index(l, n, dim)) =
            std::polar(mag, (l - k) * model.phi());
      }
  return ProcessTensor(choi);
}

/// rho_out[k][l] = sum_mn e[k][l][m][n] rho[m][n]. The trace is preserved only as well as the tensor is.
inline DensityMatrix apply_process(const ProcessTensor& t, const DensityMatrix& rho) {
  const int d = t.dim();
  if (rho.dim() != d)
    throw DimensionMismatch("tensor dimension " + std::to_string(d) + " vs state dimension " +
                            std::to_string(rho.dim()));
  CMatrix out = CMatrix::Zero(d, d);
  const CMatrix& choi = t.choi();
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      Complex s = 0.0;
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) s += choi(k * d + m, l * d + n) * rho(m, n);
      out(k, l) = s;
    }
  return DensityMatrix(out);
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, clamped to [0, 1].
inline double state_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("state dimensions differ");
  return std::clamp(linalg::uhlmann_fidelity(a.matrix(), b.matrix()), 0.0, 1.0);
}

}  // namespace csqpt
