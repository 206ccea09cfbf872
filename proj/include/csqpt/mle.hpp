#pragma once

// Iterative maximum-likelihood reconstruction from binned homodyne data.
//
// States use the R rho R fixed point. Processes are parametrized by their Choi matrix E
// and updated by E <- (I (x) L^{-1/2}) R E R (I (x) L^{-1/2}), L = Tr_out(R E R), which keeps
// Tr_out E = I. Every step is mixed with the previous iterate by a dilution weight;
// a step that lowers the log-likelihood is retried with half the weight, and the
// loop ends when no step of useful size is accepted.
//
// In phase-covariant mode each (probe, oscillator phase) pair becomes its own input state
// measured at phase 0, and every process iterate is projected onto the elements with
// k - l = m - n. Real probe amplitudes alone do not determine a general process.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "csqpt/errors.hpp"
#include "csqpt/fock.hpp"
#include "csqpt/homodyne.hpp"

namespace csqpt {

struct MleConfig {
  int max_iter = 2000;
  double rel_tol = 1e-9;
  double dilution = 1.0;
  int dim = 7;
  // Process reconstruction only: treat oscillator phase theta on probe alpha as phase 0 on
  // probe alpha e^{-i theta}. Exact for processes without their own phase reference.
  bool phase_covariant = true;
  // Over-relaxed line search after each accepted step.
  bool accelerate = false;

  void validate() const {
    if (max_iter < 1) throw PreconditionError("max_iter must be at least 1");
    if (!(rel_tol > 0.0)) throw PreconditionError("rel_tol must be positive");
    if (!(dilution > 0.0 && dilution <= 1.0)) throw PreconditionError("dilution must lie in (0, 1]");
    if (dim < 1) throw PreconditionError("reconstruction dimension must be positive");
  }
};

inline MleConfig default_state_config() { return MleConfig{10000, 1e-12, 1.0, 7, true, false}; }
inline MleConfig default_process_config() { return MleConfig{2000, 1e-9, 0.5, 7, true, false}; }

/// Histogram of a dataset over the outcomes of a HomodynePovm, flat index p * bins + b.
struct BinnedCounts {
  int phase_sections = 0;
  int bins = 0;
  std::vector<std::int64_t> counts;
  std::int64_t dropped = 0;  // samples whose x fell outside the bin edges

  std::int64_t at(int p, int b) const { return counts[static_cast<std::size_t>(p) * bins + b]; }

  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }

  std::int64_t section_total(int p) const {
    std::int64_t t = 0;
    for (int b = 0; b < bins; ++b) t += at(p, b);
    return t;
  }

  /// Relative frequencies over the retained samples.
  std::vector<double> frequencies() const {
    const double n = static_cast<double>(total());
    std::vector<double> f(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) f[j] = static_cast<double>(counts[j]) / n;
    return f;
  }
};

inline BinnedCounts bin_dataset(const QuadratureDataset& ds, const HomodynePovm& povm) {
  check_dataset(ds);
  BinnedCounts out{povm.phase_sections(), povm.bins(),
                   std::vector<std::int64_t>(povm.outcomes(), 0), 0};
  for (const auto& s : ds.samples) {
    const int b = povm.bin_of(s.x);
    if (b < 0) {
      ++out.dropped;
      continue;
    }
    ++out.counts[static_cast<std::size_t>(phase_section(s.theta, out.phase_sections)) * out.bins + b];
  }
  return out;
}

template <typename Estimate>
struct MleResult {
  Estimate estimate;
  int iterations = 0;
  bool converged = false;  // false: max_iter reached with rel_tol unmet (estimate is the best iterate)
  double log_likelihood = 0.0;
  std::vector<double> history;  // log-likelihood of every accepted iterate, starting point first
};

inline constexpr double kProbabilityFloor = 1e-300;

namespace detail {

inline double log_likelihood_from(const std::vector<double>& freq, const std::vector<double>& prob) {
  double l = 0.0;
  for (std::size_t j = 0; j < freq.size(); ++j)
    if (freq[j] > 0.0) l += freq[j] * std::log(std::max(prob[j], kProbabilityFloor));
  return l;
}

inline void check_counts(const BinnedCounts& counts, const HomodynePovm& povm) {
  if (counts.phase_sections != povm.phase_sections() || counts.bins != povm.bins() ||
      counts.counts.size() != povm.outcomes())
    throw DimensionMismatch("binned counts do not match the POVM layout");
}

/// sum_j w_j op_j over outcomes with nonzero weight.
inline CMatrix weighted_operator_sum(const HomodynePovm& povm, const std::vector<double>& weights) {
  CMatrix r = CMatrix::Zero(povm.dim(), povm.dim());
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (weights[j] != 0.0) r += weights[j] * povm.op(j);
  return r;
}

inline std::vector<double> ratio_weights(const std::vector<double>& freq, const std::vector<double>& prob) {
  std::vector<double> w(freq.size(), 0.0);
  for (std::size_t j = 0; j < freq.size(); ++j)
    if (freq[j] > 0.0) w[j] = freq[j] / std::max(prob[j], kProbabilityFloor);
  return w;
}

inline bool accept_step(double candidate, double current) {
  return candidate >= current - 1e-12 * std::max(1.0, std::abs(current));
}

/// Shared dilute/accept/stop driver over Hermitian matrices. `propose(x, d)` returns the
/// diluted fixed-point update of x. With `accelerate`, every accepted step x -> y is followed
/// by a search along x + s (y - x) for s = 2, 4, 8, ..., keeping the best point that stays
/// positive semidefinite and raises the likelihood; affine steps keep any trace constraint.
template <typename Propose, typename Score>
MleResult<CMatrix> run_fixed_point(CMatrix start, const MleConfig& cfg, Score score, Propose propose) {
  MleResult<CMatrix> res;
  res.estimate = std::move(start);
  res.log_likelihood = score(res.estimate);
  res.history.push_back(res.log_likelihood);
  for (int it = 0; it < cfg.max_iter; ++it) {
    double d = cfg.dilution;
    bool accepted = false;
    CMatrix candidate;
    double l_new = 0.0;
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt, d *= 0.5) {
      candidate = propose(res.estimate, d);
      l_new = score(candidate);
      accepted = accept_step(l_new, res.log_likelihood);
    }
    res.iterations = it + 1;
    if (!accepted) {
      res.converged = true;
      break;
    }
    if (cfg.accelerate) {
      const CMatrix step = candidate - res.estimate;
      for (double s = 2.0; s <= 1024.0; s *= 2.0) {
        CMatrix trial = linalg::hermitian_part(res.estimate + s * step);
        if (linalg::min_eigenvalue(trial) < 0.0) break;
        const double l_trial = score(trial);
        if (!(l_trial > l_new)) break;
        candidate = std::move(trial);
        l_new = l_trial;
      }
    }
    const double gain = (l_new - res.log_likelihood) / std::max(std::abs(res.log_likelihood), 1e-300);
    res.estimate = std::move(candidate);
    res.log_likelihood = l_new;
    res.history.push_back(l_new);
    if (gain < cfg.rel_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace detail

/// sum_j f_j ln p_j with p_j = Tr(op_j rho), floored at 1e-300; f_j are relative frequencies.
inline double log_likelihood(const DensityMatrix& rho, const BinnedCounts& counts, const HomodynePovm& povm) {
  detail::check_counts(counts, povm);
  if (rho.dim() != povm.dim()) throw DimensionMismatch("state and POVM dimensions differ");
  return detail::log_likelihood_from(counts.frequencies(), povm.probabilities(rho.matrix()));
}

/// State reconstruction from explicit outcome frequencies (need not be integers).
inline MleResult<DensityMatrix> state_mle_frequencies(const std::vector<double>& freq, const HomodynePovm& povm,
                                                      const MleConfig& cfg) {
  cfg.validate();
  if (cfg.dim != povm.dim()) throw DimensionMismatch("MleConfig.dim differs from POVM dimension");
  if (freq.size() != povm.outcomes()) throw DimensionMismatch("frequency vector does not match the POVM");

  auto score = [&](const CMatrix& rho) { return detail::log_likelihood_from(freq, povm.probabilities(rho)); };
  auto propose = [&](const CMatrix& rho, double d) {
    const auto prob = povm.probabilities(rho);
    const CMatrix r = detail::weighted_operator_sum(povm, detail::ratio_weights(freq, prob));
    CMatrix next = linalg::hermitian_part(r * rho * r);
    next /= next.trace().real();
    return CMatrix((1.0 - d) * rho + d * next);
  };
  auto raw = detail::run_fixed_point(maximally_mixed(cfg.dim).matrix(), cfg, score, propose);
  MleResult<DensityMatrix> res;
  res.estimate = DensityMatrix(raw.estimate);
  res.iterations = raw.iterations;
  res.converged = raw.converged;
  res.log_likelihood = raw.log_likelihood;
  res.history = std::move(raw.history);
  return res;
}

inline MleResult<DensityMatrix> state_mle(const BinnedCounts& counts, const HomodynePovm& povm,
                                          const MleConfig& cfg) {
  detail::check_counts(counts, povm);
  if (counts.total() < 1) throw PreconditionError("no counts to reconstruct from");
  return state_mle_frequencies(counts.frequencies(), povm, cfg);
}

/// One coherent probe and its binned output data.
struct ProbeCounts {
  Complex alpha;
  BinnedCounts counts;
};

/// One coherent probe with explicit outcome weights (used for noiseless expected frequencies).
struct ProbeFrequencies {
  Complex alpha;
  std::vector<double> weights;
};

namespace detail {

/// One input state together with the measurement operators and frequencies observed on its output.
struct ProcessSetting {
  CMatrix input;
  const std::vector<CMatrix>* ops = nullptr;
  std::vector<double> freq;  // normalized over all settings together
};

struct ProcessProblem {
  int dim = 0;
  std::vector<CMatrix> ops_all;    // every (section, bin) operator
  std::vector<CMatrix> ops_phase0; // bin operators at oscillator phase 0 (with the 1/P factor)
  std::vector<ProcessSetting> settings;
};

inline ProcessProblem make_process_problem(const std::vector<ProbeFrequencies>& probes, const HomodynePovm& povm,
                                           int dim, bool phase_covariant) {
  if (probes.size() < 2) throw InsufficientProbes("process tomography needs at least two probes");
  bool distinct = false;
  for (const auto& p : probes)
    if (std::abs(p.alpha - probes.front().alpha) > 1e-12) distinct = true;
  if (!distinct) throw InsufficientProbes("all probe amplitudes are identical");

  double total = 0.0;
  for (const auto& p : probes) {
    if (p.weights.size() != povm.outcomes()) throw DimensionMismatch("probe data does not match the POVM");
    for (double w : p.weights) {
      if (w < 0.0) throw PreconditionError("negative outcome weight");
      total += w;
    }
  }
  if (!(total > 0.0)) throw PreconditionError("no counts to reconstruct from");

  ProcessProblem prob;
  prob.dim = dim;
  const int sections = povm.phase_sections();
  const int bins = povm.bins();
  for (std::size_t j = 0; j < povm.outcomes(); ++j) prob.ops_all.push_back(povm.op(j));
  for (int b = 0; b < bins; ++b) prob.ops_phase0.push_back(povm.bin_overlap(b).cast<Complex>() / sections);

  for (const auto& p : probes) {
    if (!phase_covariant) {
      ProcessSetting s{coherent_density(p.alpha, dim).matrix(), &prob.ops_all, {}};
      for (double w : p.weights) s.freq.push_back(w / total);
      prob.settings.push_back(std::move(s));
      continue;
    }
    // Oscillator phase theta on the output of |alpha> is equivalent, for a phase-covariant
    // process, to phase 0 on the output of |alpha e^{-i theta}>.
    for (int sec = 0; sec < sections; ++sec) {
      const Complex rotated = p.alpha * std::polar(1.0, -section_phase(sec, sections));
      ProcessSetting s{coherent_density(rotated, dim).matrix(), &prob.ops_phase0, {}};
      for (int b = 0; b < bins; ++b) s.freq.push_back(p.weights[static_cast<std::size_t>(sec) * bins + b] / total);
      prob.settings.push_back(std::move(s));
    }
  }
  return prob;
}

/// E(rho) from a Choi matrix, without the DensityMatrix invariant checks.
inline CMatrix choi_apply(const CMatrix& choi, const CMatrix& rho, int d) {
  CMatrix out(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      Complex s = 0.0;
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) s += choi(k * d + m, l * d + n) * rho(m, n);
      out(k, l) = s;
    }
  return out;
}

inline std::vector<double> setting_probabilities(const CMatrix& choi, const ProcessSetting& s, int d) {
  const CMatrix out = choi_apply(choi, s.input, d);
  const CMatrix out_t = out.transpose();
  std::vector<double> p(s.ops->size());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = (*s.ops)[j].cwiseProduct(out_t).sum().real();
  return p;
}

inline double process_log_likelihood(const CMatrix& choi, const ProcessProblem& prob) {
  double l = 0.0;
  for (const auto& s : prob.settings) l += log_likelihood_from(s.freq, setting_probabilities(choi, s, prob.dim));
  return l;
}

/// Keeps only the phase-symmetric elements k - l = m - n of a Choi-space operator.
inline CMatrix covariant_part(const CMatrix& choi, int d) {
  CMatrix out = CMatrix::Zero(d * d, d * d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m) {
        const int n = m - (k - l);
        if (n >= 0 && n < d) out(k * d + m, l * d + n) = choi(k * d + m, l * d + n);
      }
  return out;
}

/// Tr_out of a Choi-space operator: out[m][n] = sum_k M[(k,m),(k,n)].
inline CMatrix partial_trace_output(const CMatrix& m, int d) {
  CMatrix out = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) out += m.block(k * d, k * d, d, d);
  return out;
}

inline CMatrix process_step(const CMatrix& choi, const ProcessProblem& prob, bool phase_covariant) {
  const int d = prob.dim;
  CMatrix r = CMatrix::Zero(d * d, d * d);
  for (const auto& s : prob.settings) {
    const auto w = ratio_weights(s.freq, setting_probabilities(choi, s, d));
    CMatrix a = CMatrix::Zero(d, d);
    for (std::size_t j = 0; j < w.size(); ++j)
      if (w[j] != 0.0) a += w[j] * (*s.ops)[j];
    const CMatrix rho_t = s.input.transpose();
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) r.block(k * d, l * d, d, d) += a(k, l) * rho_t;
  }
  const CMatrix rer = linalg::hermitian_part(r * choi * r);
  const CMatrix s = linalg::psd_inv_sqrt(partial_trace_output(rer, d), 1e-12);
  CMatrix next = rer;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) next.block(k * d, l * d, d, d) = s * rer.block(k * d, l * d, d, d) * s;
  next = linalg::hermitian_part(next);
  return phase_covariant ? covariant_part(next, d) : next;
}

}  // namespace detail

/// Log-likelihood of the process data: sum_ij f_ij ln Tr[op_j E(rho_i)], frequencies
/// normalized over all probes together.
inline double log_likelihood(const ProcessTensor& t, const std::vector<ProbeCounts>& probes,
                             const HomodynePovm& povm, bool phase_covariant = true) {
  std::vector<ProbeFrequencies> pf;
  for (const auto& p : probes) {
    detail::check_counts(p.counts, povm);
    std::vector<double> w(p.counts.counts.begin(), p.counts.counts.end());
    pf.push_back({p.alpha, std::move(w)});
  }
  const auto prob = detail::make_process_problem(pf, povm, t.dim(), phase_covariant);
  return detail::process_log_likelihood(t.choi(), prob);
}

inline MleResult<ProcessTensor> process_mle_frequencies(const std::vector<ProbeFrequencies>& probes,
                                                        const HomodynePovm& povm, const MleConfig& cfg) {
  cfg.validate();
  if (cfg.dim != povm.dim()) throw DimensionMismatch("MleConfig.dim differs from POVM dimension");
  const auto prob = detail::make_process_problem(probes, povm, cfg.dim, cfg.phase_covariant);
  const int d = cfg.dim;

  const CMatrix start = 0.5 * identity_tensor(d).choi() + 0.5 * depolarizing_tensor(d).choi();
  auto score = [&](const CMatrix& choi) { return detail::process_log_likelihood(choi, prob); };
  auto propose = [&](const CMatrix& choi, double dil) {
    return CMatrix((1.0 - dil) * choi + dil * detail::process_step(choi, prob, cfg.phase_covariant));
  };
  auto raw = detail::run_fixed_point(start, cfg, score, propose);

  MleResult<ProcessTensor> res;
  res.estimate = ProcessTensor(raw.estimate);
  res.iterations = raw.iterations;
  res.converged = raw.converged;
  res.log_likelihood = raw.log_likelihood;
  res.history = std::move(raw.history);
  return res;
}

inline MleResult<ProcessTensor> process_mle(const std::vector<ProbeCounts>& probes, const HomodynePovm& povm,
                                            const MleConfig& cfg) {
  std::vector<ProbeFrequencies> pf;
  pf.reserve(probes.size());
  for (const auto& p : probes) {
    detail::check_counts(p.counts, povm);
    pf.push_back({p.alpha, std::vector<double>(p.counts.counts.begin(), p.counts.counts.end())});
  }
  return process_mle_frequencies(pf, povm, cfg);
}

}  // namespace csqpt
