#pragma once

// End-to-end runs: simulated probe data on disk, state and process reconstruction from it.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "csqpt/analysis.hpp"
#include "csqpt/errors.hpp"
#include "csqpt/fock.hpp"
#include "csqpt/homodyne.hpp"
#include "csqpt/io.hpp"
#include "csqpt/mle.hpp"
#include "csqpt/wigner.hpp"

namespace csqpt {

namespace fs = std::filesystem;

inline constexpr int kSimulationDim = 12;

/// Nine real probe amplitudes 0, 0.1375, ..., 1.1.
inline std::vector<Complex> default_probe_alphas() {
  std::vector<Complex> a;
  for (int i = 0; i < 9; ++i) a.emplace_back(0.1375 * i, 0.0);
  return a;
}

struct ExperimentSpec {
  ChannelModel channel{0.62, 0.92};
  std::vector<Complex> probe_alphas = default_probe_alphas();
  std::int64_t n_samples = 500000;
  int phase_sections = 20;
  std::uint64_t seed = 1;
  int sim_dim = kSimulationDim;

  void validate() const {
    if (probe_alphas.empty()) throw PreconditionError("at least one probe amplitude is required");
    if (n_samples < 1) throw PreconditionError("n_samples must be at least 1");
    if (phase_sections < 1) throw PreconditionError("phase_sections must be at least 1");
  }
};

/// Dataset for probe i, drawn from the channel output with seed spec.seed + i.
inline QuadratureDataset simulate_probe(const ExperimentSpec& spec, std::size_t i) {
  const ProcessTensor channel = loss_channel_tensor(spec.channel, spec.sim_dim);
  const DensityMatrix out = apply_process(channel, coherent_density(spec.probe_alphas.at(i), spec.sim_dim));
  return sample_dataset(out, spec.phase_sections, spec.n_samples, spec.seed + i, spec.probe_alphas[i]);
}

inline std::vector<QuadratureDataset> simulate_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<QuadratureDataset> out;
  out.reserve(spec.probe_alphas.size());
  for (std::size_t i = 0; i < spec.probe_alphas.size(); ++i) out.push_back(simulate_probe(spec, i));
  return out;
}

/// Tracks files written by a command and deletes them unless commit() is called.
class OutputGuard {
 public:
  OutputGuard() = default;
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }

  void write(const fs::path& path, const std::string& content) {
    written_.push_back(path);
    io::write_file(path, content);
  }

  void commit() { committed_ = true; }
  const std::vector<fs::path>& written() const { return written_; }

 private:
  std::vector<fs::path> written_;
  bool committed_ = false;
};

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

/// Writes probe_<i>.csv and manifest.csv into `dir`. All data is generated before the first
/// file is written, and nothing is left behind if writing fails.
inline io::Manifest write_experiment(const ExperimentSpec& spec, const fs::path& dir) {
  const auto datasets = simulate_experiment(spec);
  ensure_directory(dir);
  io::Manifest manifest;
  manifest.notes.push_back("eta=" + io::format_double(spec.channel.eta()) +
                           " phi=" + io::format_double(spec.channel.phi()));
  manifest.notes.push_back("samples=" + std::to_string(spec.n_samples) +
                           " phase_sections=" + std::to_string(spec.phase_sections));
  manifest.notes.push_back("seed=" + std::to_string(spec.seed) + " probe_seed=seed+index");
  OutputGuard guard;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const std::string name = "probe_" + std::to_string(i) + ".csv";
    guard.write(dir / name, io::format_dataset(datasets[i]));
    manifest.entries.push_back({spec.probe_alphas[i], name});
  }
  guard.write(dir / "manifest.csv", io::format_manifest(manifest));
  guard.commit();
  return manifest;
}

inline HomodynePovm povm_for(const io::RunConfig& cfg) {
  return build_povm(cfg.phase_sections, cfg.edges(), cfg.dim_rec);
}

struct StateTomography {
  MleResult<DensityMatrix> mle;
  Complex probe_alpha;
  double probe_fidelity = 0.0;
  Complex centre;  // <a>, the centre of the Wigner function
  std::int64_t dropped = 0;
};

inline StateTomography state_tomography(const QuadratureDataset& ds, const io::RunConfig& cfg) {
  const HomodynePovm povm = povm_for(cfg);
  const BinnedCounts counts = bin_dataset(ds, povm);
  StateTomography st{state_mle(counts, povm, cfg.state_mle()), ds.probe_alpha, 0.0, 0.0, counts.dropped};
  st.probe_fidelity = state_fidelity(st.mle.estimate, coherent_density(ds.probe_alpha, cfg.dim_rec));
  st.centre = st.mle.estimate.mean_amplitude();
  return st;
}

inline std::string format_state_report(const StateTomography& st) {
  using io::format_double;
  std::string out = "[state]\n";
  out += "probe_alpha_re," + format_double(st.probe_alpha.real(), 10) + '\n';
  out += "probe_alpha_im," + format_double(st.probe_alpha.imag(), 10) + '\n';
  out += "fidelity_to_probe," + format_double(st.probe_fidelity, 10) + '\n';
  out += "mean_photon_number," + format_double(st.mle.estimate.mean_photon_number(), 10) + '\n';
  out += "wigner_centre_x," + format_double(st.centre.real(), 10) + '\n';
  out += "wigner_centre_y," + format_double(st.centre.imag(), 10) + '\n';
  out += "wigner_centre_distance," + format_double(std::abs(st.centre), 10) + '\n';
  out += "\n[mle]\n";
  out += "iterations," + std::to_string(st.mle.iterations) + '\n';
  out += "converged," + std::to_string(st.mle.converged ? 1 : 0) + '\n';
  out += "log_likelihood," + format_double(st.mle.log_likelihood, 12) + '\n';
  out += "dropped_samples," + std::to_string(st.dropped) + '\n';
  return out;
}

struct ProcessTomography {
  MleResult<ProcessTensor> mle;
  ProcessAnalysis analysis;
};

inline ProcessTomography process_tomography(const std::vector<QuadratureDataset>& datasets,
                                            const io::RunConfig& cfg, const ProcessTensor* reference = nullptr) {
  const HomodynePovm povm = povm_for(cfg);
  std::vector<ProbeCounts> probes;
  probes.reserve(datasets.size());
  for (const auto& ds : datasets) probes.push_back({ds.probe_alpha, bin_dataset(ds, povm)});
  ProcessTomography pt{process_mle(probes, povm, cfg.process_mle()), {}};
  if (reference != nullptr && reference->dim() != cfg.dim_rec)
    throw DimensionMismatch("reference tensor dimension differs from dim_rec");
  pt.analysis = analyze_process(pt.mle.estimate, reference);
  return pt;
}

/// Reads every dataset listed in a manifest; relative paths are taken from the manifest's directory.
inline std::vector<QuadratureDataset> read_manifest_datasets(const fs::path& manifest_path) {
  const io::Manifest m = io::read_manifest(manifest_path);
  if (m.entries.empty()) throw ParseError("manifest lists no probe files");
  std::vector<QuadratureDataset> out;
  for (const auto& e : m.entries) {
    const fs::path p = e.path.is_absolute() ? e.path : manifest_path.parent_path() / e.path;
    if (!fs::exists(p)) throw IoError("missing probe file " + p.string());
    QuadratureDataset ds = io::read_dataset(p);
    ds.probe_alpha = e.alpha;
    out.push_back(std::move(ds));
  }
  return out;
}

inline std::string format_process_summary(const ProcessTomography& pt) {
  std::string out = io::format_process_report(pt.analysis);
  out += "\n[mle]\n";
  out += "iterations," + std::to_string(pt.mle.iterations) + '\n';
  out += "converged," + std::to_string(pt.mle.converged ? 1 : 0) + '\n';
  out += "log_likelihood," + io::format_double(pt.mle.log_likelihood, 12) + '\n';
  out += "tp_residual," + io::format_double(pt.mle.estimate.tp_residual(), 6) + '\n';
  out += "min_choi_eigenvalue," + io::format_double(pt.mle.estimate.min_choi_eigenvalue(), 6) + '\n';
  return out;
}

/// Parses `coherent:<re>,<im>`, `fock:<n>` or `super:<c0>,<c1>` into a state of dimension `dim`.
inline DensityMatrix parse_input_state(std::string_view text, int dim) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ParseError("input state '" + std::string(text) + "' lacks a kind prefix");
  const auto kind = text.substr(0, colon);
  const auto args = io::split(text.substr(colon + 1), ',');
  auto number = [](std::string_view tok) {
    try {
      return io::parse_double(tok);
    } catch (const ParseError&) {
      throw ParseError("bad number '" + std::string(tok) + "' in input state");
    }
  };
  if (kind == "coherent") {
    if (args.size() != 2) throw ParseError("coherent needs <re>,<im>");
    return coherent_density(Complex(number(args[0]), number(args[1])), dim);
  }
  if (kind == "fock") {
    if (args.size() != 1) throw ParseError("fock needs <n>");
    std::int64_t n = 0;
    try {
      n = io::parse_int(args[0]);
    } catch (const ParseError&) {
      throw ParseError("bad Fock index '" + std::string(args[0]) + "'");
    }
    if (n < 0 || n >= dim) throw ParseError("Fock index '" + std::string(args[0]) + "' outside truncation");
    return fock_density(static_cast<int>(n), dim);
  }
  if (kind == "super") {
    if (args.size() != 2) throw ParseError("super needs <c0>,<c1>");
    if (dim < 2) throw PreconditionError("superposition needs dimension >= 2");
    CVector c = CVector::Zero(dim);
    c(0) = number(args[0]);
    c(1) = number(args[1]);
    return pure_density(c);
  }
  throw ParseError("unknown input state kind '" + std::string(kind) + "'");
}

/// Default Wigner grid: x, y in [-2.5, 2.5] with 101 points each.
inline std::vector<double> default_wigner_axis() { return linspace(-2.5, 2.5, 101); }

}  // namespace csqpt
