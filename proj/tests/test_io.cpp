#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace csqpt;

namespace {

void expect_parse_error_at(const std::function<void()>& f, std::size_t line) {
  try {
    f();
    ADD_FAILURE() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
  }
}

bool relative_equal(double a, double b) { return a == b || std::abs(a - b) <= 1e-15 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST(DensityFile, RoundTripIsExact) {
  std::mt19937_64 gen(12);
  const auto rho = testing_support::random_state(6, gen);
  const auto back = io::parse_density(io::format_density(rho));
  ASSERT_EQ(back.dim(), 6);
  for (int m = 0; m < 6; ++m)
    for (int n = 0; n < 6; ++n) {
      EXPECT_TRUE(relative_equal(back(m, n).real(), rho(m, n).real()));
      EXPECT_TRUE(relative_equal(back(m, n).imag(), rho(m, n).imag()));
    }
}

TEST(TensorFile, RoundTripIsExactAndSparse) {
  const auto t = loss_channel_tensor(ChannelModel(0.62, 0.92), 7);
  const std::string text = io::format_tensor(t);
  EXPECT_EQ(text.rfind("# process-tensor dim=7\n", 0), 0u);
  const auto back = io::parse_tensor(text);
  EXPECT_EQ(back.choi(), t.choi());
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  std::size_t nonzero = 0;
  for (int i = 0; i < t.choi().size(); ++i) nonzero += t.choi().data()[i] != Complex(0.0, 0.0);
  EXPECT_EQ(lines, nonzero + 1);
}

TEST(DatasetFile, RoundTripIsExact) {
  const auto ds = sample_dataset(coherent_density(std::polar(0.4, 0.3), 8), 20, 300, 77, std::polar(0.4, 0.3));
  const auto back = io::parse_dataset(io::format_dataset(ds));
  EXPECT_EQ(back.samples, ds.samples);
  EXPECT_EQ(back.probe_alpha, ds.probe_alpha);
  EXPECT_EQ(back.seed, 77u);
}

TEST(DatasetFile, MalformedLinesReportLineNumbers) {
  const std::string header = "# quadrature-dataset alpha_re=0 alpha_im=0 seed=1\n";
  expect_parse_error_at([&] { io::parse_dataset(header + "0.1,0.2\n0.3;0.4\n"); }, 3);
  expect_parse_error_at([&] { io::parse_dataset(header + "0.1,abc\n"); }, 2);
  expect_parse_error_at([&] { io::parse_dataset(header + "7.0,0.1\n"); }, 2);
  expect_parse_error_at([&] { io::parse_dataset("theta,x\n"); }, 1);
  EXPECT_THROW(io::parse_dataset(""), ParseError);
  EXPECT_THROW(io::parse_dataset(header), ParseError);
}

TEST(TensorFile, MalformedInput) {
  expect_parse_error_at([] { io::parse_tensor("# process-tensor dim=2\n0,0,0,0,1,0\n0,0,5,0,1,0\n"); }, 3);
  expect_parse_error_at([] { io::parse_tensor("# process-tensor\n"); }, 1);
  expect_parse_error_at([] { io::parse_density("# density-matrix dim=2\n0,0,1\n"); }, 2);
}

TEST(ManifestFile, RoundTripWithNotes) {
  io::Manifest m;
  m.notes = {"eta=0.62 phi=0.92", "seed=1"};
  m.entries = {{Complex(0.0, 0.0), "probe_0.csv"}, {Complex(0.1375, -0.5), "sub/probe_1.csv"}};
  const auto back = io::parse_manifest(io::format_manifest(m));
  EXPECT_EQ(back.notes, m.notes);
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[1].alpha, Complex(0.1375, -0.5));
  EXPECT_EQ(back.entries[1].path, fs::path("sub/probe_1.csv"));
  expect_parse_error_at([] { io::parse_manifest("# manifest\n0,0\n"); }, 2);
}

TEST(WignerFile, RoundTrip) {
  const auto axis = linspace(-1.0, 1.0, 5);
  const auto g = wigner(coherent_density(0.3, 6), axis, linspace(-0.5, 0.5, 3));
  const auto back = io::parse_wigner(io::format_wigner(g));
  EXPECT_EQ(back.x_axis, g.x_axis);
  EXPECT_EQ(back.y_axis, g.y_axis);
  EXPECT_EQ(back.values, g.values);
}

TEST(Config, ParsesKnownKeys) {
  const auto cfg = io::parse_config(
      "# comment\nmax_iter = 50\nrel_tol=1e-7\ndilution = 0.25\ndim_rec = 5\nphase_sections = 10\n"
      "x_bins = 40\nx_min = -4\nx_max = 4.5\nseed = 99\n");
  EXPECT_EQ(cfg.state_mle().max_iter, 50);
  EXPECT_DOUBLE_EQ(cfg.process_mle().rel_tol, 1e-7);
  EXPECT_DOUBLE_EQ(cfg.state_mle().dilution, 0.25);
  EXPECT_DOUBLE_EQ(cfg.process_mle().dilution, 0.25);
  EXPECT_EQ(cfg.dim_rec, 5);
  EXPECT_EQ(cfg.phase_sections, 10);
  EXPECT_EQ(cfg.edges().size(), 41u);
  EXPECT_DOUBLE_EQ(cfg.edges().back(), 4.5);
  EXPECT_EQ(cfg.seed, 99u);
}

TEST(Config, DefaultsDependOnReconstructionKind) {
  const auto cfg = io::parse_config("");
  EXPECT_DOUBLE_EQ(cfg.state_mle().dilution, 1.0);
  EXPECT_DOUBLE_EQ(cfg.process_mle().dilution, 0.5);
  EXPECT_DOUBLE_EQ(cfg.state_mle().rel_tol, 1e-12);
  EXPECT_DOUBLE_EQ(cfg.process_mle().rel_tol, 1e-9);
  EXPECT_EQ(cfg.dim_rec, 7);
  EXPECT_EQ(cfg.phase_sections, 20);
  EXPECT_EQ(cfg.x_bins, 100);
}

TEST(Config, UnknownKeyAndBadValues) {
  expect_parse_error_at([] { io::parse_config("max_iter = 5\nmax_iters = 6\n"); }, 2);
  expect_parse_error_at([] { io::parse_config("rel_tol = fast\n"); }, 1);
  expect_parse_error_at([] { io::parse_config("dim_rec\n"); }, 1);
  EXPECT_THROW(io::parse_config("dilution = 2\n"), PreconditionError);
  EXPECT_THROW(io::parse_config("x_min = 3\nx_max = 1\n"), ParseError);
}

TEST(Report, SectionsReadBack) {
  const auto t = loss_channel_tensor(ChannelModel(0.62, 0.92), 7);
  const auto text = io::format_process_report(analyze_process(t, &t));
  for (const char* s : {"[diagonal]", "[phases]", "[fits]", "[fidelity]"}) EXPECT_NE(text.find(s), std::string::npos);
  const auto fits = io::report_section(text, "fits");
  EXPECT_NEAR(fits.at("eta_hat"), 0.62, 1e-6);
  EXPECT_NEAR(fits.at("phi_hat"), 0.92, 1e-9);
  EXPECT_NEAR(fits.at("block_mean_0_2"), 1.84, 1e-9);
  const auto fid = io::report_section(text, "fidelity");
  EXPECT_NEAR(fid.at("reference_diagonal"), 1.0, 1e-9);
}
