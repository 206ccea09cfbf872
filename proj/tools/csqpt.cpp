#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csqpt/csqpt.hpp"

using namespace csqpt;

namespace {

io::RunConfig load_config(const std::string& path) {
  return path.empty() ? io::RunConfig{} : io::read_config(path);
}

Complex parse_probe(const std::string& text) {
  const auto f = io::split(text, ',');
  if (f.size() == 1) return {io::parse_double(f[0]), 0.0};
  if (f.size() == 2) return {io::parse_double(f[0]), io::parse_double(f[1])};
  throw ParseError("probe amplitude '" + text + "' is not <re> or <re>,<im>");
}

// Density-matrix or process-tensor file, told apart by the header tag.
bool is_tensor_file(const fs::path& path) {
  const std::string text = io::read_file(path);
  return text.rfind("# process-tensor", 0) == 0;
}

struct GridOptions {
  double lo = -2.5;
  double hi = 2.5;
  int points = 101;

  std::vector<double> axis() const {
    if (points < 2 || !(hi > lo)) throw PreconditionError("invalid Wigner grid");
    return linspace(lo, hi, points);
  }
};

void add_grid_options(CLI::App* cmd, GridOptions& g) {
  cmd->add_option("--grid-min", g.lo, "Lower edge of the Wigner grid")->capture_default_str();
  cmd->add_option("--grid-max", g.hi, "Upper edge of the Wigner grid")->capture_default_str();
  cmd->add_option("--grid-points", g.points, "Points per Wigner axis")->capture_default_str();
}

void warn_if_unconverged(bool converged, int iterations) {
  if (!converged)
    std::cerr << "csqpt: warning: reconstruction stopped at max_iter (" << iterations
              << " iterations) before reaching rel_tol; writing the best iterate\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent-state quantum process tomography: simulation and reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Sample homodyne data for coherent probes sent through a loss channel");
  double eta = 0.62;
  double phi = 0.92;
  std::int64_t samples = 500000;
  std::vector<std::string> probes;
  sim->add_option("--eta", eta, "Channel transmissivity")->capture_default_str();
  sim->add_option("--phi", phi, "Channel phase in radians")->capture_default_str();
  sim->add_option("--samples", samples, "Samples per probe")->capture_default_str();
  sim->add_option("--probe", probes, "Probe amplitude <re> or <re>,<im>; repeatable (default: 0, 0.1375, ..., 1.1)");

  // state-tomo
  auto* st = app.add_subcommand("state-tomo", "Reconstruct a density matrix from one dataset");
  std::string dataset_path;
  bool with_wigner = false;
  GridOptions st_grid;
  st->add_option("dataset", dataset_path, "Quadrature dataset file")->required();
  st->add_flag("--wigner", with_wigner, "Also write the Wigner function of the estimate");
  add_grid_options(st, st_grid);

  // process-tomo
  auto* pt = app.add_subcommand("process-tomo", "Reconstruct a process tensor from the datasets of a manifest");
  std::string manifest_path;
  std::string reference_path;
  pt->add_option("manifest", manifest_path, "Manifest file")->required();
  pt->add_option("--reference", reference_path, "Reference process-tensor file to compare against");

  // predict
  auto* pr = app.add_subcommand("predict", "Apply a process tensor to an input state");
  std::string tensor_path;
  std::string input_spec;
  GridOptions pr_grid;
  pr->add_option("tensor", tensor_path, "Process-tensor file")->required();
  pr->add_option("input", input_spec, "coherent:<re>,<im> | fock:<n> | super:<c0>,<c1>")->required();
  add_grid_options(pr, pr_grid);

  // wigner
  auto* wg = app.add_subcommand("wigner", "Wigner function of a density-matrix file");
  std::string density_path;
  GridOptions wg_grid;
  wg->add_option("density", density_path, "Density-matrix file")->required();
  add_grid_options(wg, wg_grid);

  // fidelity
  auto* fd = app.add_subcommand("fidelity", "Fidelity between two density matrices or two process tensors");
  std::string first_path;
  std::string second_path;
  fd->add_option("first", first_path, "Density-matrix or process-tensor file")->required();
  fd->add_option("second", second_path, "File of the same kind")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    io::RunConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    const fs::path out(out_dir);

    if (*sim) {
      ExperimentSpec spec;
      spec.channel = ChannelModel(eta, phi);
      if (!probes.empty()) {
        spec.probe_alphas.clear();
        for (const auto& p : probes) spec.probe_alphas.push_back(parse_probe(p));
      }
      spec.n_samples = samples;
      spec.phase_sections = cfg.phase_sections;
      spec.seed = cfg.seed;
      const auto manifest = write_experiment(spec, out);
      std::cout << "wrote " << manifest.entries.size() << " probe files and " << (out / "manifest.csv").string()
                << "\n";
    } else if (*st) {
      const auto ds = io::read_dataset(dataset_path);
      const auto result = state_tomography(ds, cfg);
      warn_if_unconverged(result.mle.converged, result.mle.iterations);
      const std::string report = format_state_report(result);
      ensure_directory(out);
      OutputGuard guard;
      guard.write(out / "state.csv", io::format_density(result.mle.estimate));
      guard.write(out / "state_report.txt", report);
      if (with_wigner)
        guard.write(out / "state_wigner.csv",
                    io::format_wigner(wigner(result.mle.estimate, st_grid.axis(), st_grid.axis())));
      guard.commit();
      std::cout << report;
    } else if (*pt) {
      std::optional<ProcessTensor> reference;
      if (!reference_path.empty()) reference = io::read_tensor(reference_path);
      const auto datasets = read_manifest_datasets(manifest_path);
      const auto result = process_tomography(datasets, cfg, reference ? &*reference : nullptr);
      warn_if_unconverged(result.mle.converged, result.mle.iterations);
      const std::string report = format_process_summary(result);
      ensure_directory(out);
      OutputGuard guard;
      guard.write(out / "tensor.csv", io::format_tensor(result.mle.estimate));
      guard.write(out / "process_report.txt", report);
      guard.commit();
      std::cout << report;
    } else if (*pr) {
      const auto tensor = io::read_tensor(tensor_path);
      const auto rho_in = parse_input_state(input_spec, tensor.dim());
      const auto pred = predict_output(tensor, rho_in, pr_grid.axis(), pr_grid.axis());
      ensure_directory(out);
      OutputGuard guard;
      guard.write(out / "predicted_state.csv", io::format_density(pred.state));
      guard.write(out / "predicted_wigner.csv", io::format_wigner(pred.wigner));
      guard.commit();
      std::cout << io::format_density(pred.state);
    } else if (*wg) {
      const auto rho = io::read_density(density_path);
      ensure_directory(out);
      OutputGuard guard;
      guard.write(out / "wigner.csv", io::format_wigner(wigner(rho, wg_grid.axis(), wg_grid.axis())));
      guard.commit();
    } else if (*fd) {
      const bool a_tensor = is_tensor_file(first_path);
      if (a_tensor != is_tensor_file(second_path)) throw PreconditionError("files are of different kinds");
      if (a_tensor) {
        const auto f = process_fidelity(io::read_tensor(first_path), io::read_tensor(second_path));
        std::cout << "full," << io::format_double(f.full, 10) << "\ndiagonal," << io::format_double(f.diagonal, 10)
                  << "\n";
      } else {
        std::cout << "fidelity,"
                  << io::format_double(state_fidelity(io::read_density(first_path), io::read_density(second_path)), 10)
                  << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "csqpt: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
