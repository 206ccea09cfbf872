#pragma once

// Plain-text file formats: a '#' header line followed by comma-separated records.
//
//   # density-matrix dim=<D>                              m,n,re,im
//   # process-tensor dim=<D>                              k,l,m,n,re,im   (nonzero elements)
//   # quadrature-dataset alpha_re=<r> alpha_im=<i> seed=<s>  theta,x
//   # manifest                                            alpha_re,alpha_im,path
//   # wigner-grid nx=<nx> ny=<ny>                         x,y,w
//
// Floats are written with 17 significant digits so that every value reads back exactly.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "csqpt/analysis.hpp"
#include "csqpt/errors.hpp"
#include "csqpt/fock.hpp"
#include "csqpt/homodyne.hpp"
#include "csqpt/mle.hpp"
#include "csqpt/wigner.hpp"

namespace csqpt::io {

namespace fs = std::filesystem;

inline void append_double(std::string& out, double v, int precision = 17) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, precision);
  out.append(buf, res.ptr);
}

inline std::string format_double(double v, int precision = 17) {
  std::string s;
  append_double(s, v, precision);
  return s;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view tok, std::size_t line = 0) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || tok.empty())
    throw ParseError("malformed number '" + std::string(tok) + "'", line);
  return v;
}

inline std::int64_t parse_int(std::string_view tok, std::size_t line = 0) {
  tok = trim(tok);
  std::int64_t v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || tok.empty())
    throw ParseError("malformed integer '" + std::string(tok) + "'", line);
  return v;
}

inline std::uint64_t parse_uint(std::string_view tok, std::size_t line = 0) {
  tok = trim(tok);
  std::uint64_t v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || tok.empty())
    throw ParseError("malformed unsigned integer '" + std::string(tok) + "'", line);
  return v;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

/// Iterates the lines of a text file with 1-based numbers.
class LineReader {
 public:
  explicit LineReader(std::string text) : text_(std::move(text)) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    const auto stop = end == std::string::npos ? text_.size() : end;
    line = std::string_view(text_).substr(pos_, stop - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = stop + 1;
    ++number_;
    return true;
  }

  std::size_t number() const { return number_; }

 private:
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

/// key=value pairs of a header such as "# process-tensor dim=7". Throws if the tag differs.
inline std::map<std::string, std::string> parse_header(std::string_view line, std::string_view tag) {
  line = trim(line);
  if (line.empty() || line.front() != '#') throw ParseError("missing '# " + std::string(tag) + "' header", 1);
  line.remove_prefix(1);
  std::istringstream ss{std::string(line)};
  std::string word;
  if (!(ss >> word) || word != tag) throw ParseError("expected '# " + std::string(tag) + "' header", 1);
  std::map<std::string, std::string> kv;
  while (ss >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw ParseError("malformed header field '" + word + "'", 1);
    kv[word.substr(0, eq)] = word.substr(eq + 1);
  }
  return kv;
}

inline const std::string& header_field(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ParseError("header lacks field '" + key + "'", 1);
  return it->second;
}

inline bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

// ---------------------------------------------------------------- density matrices

inline std::string format_density(const DensityMatrix& rho) {
  std::string out = "# density-matrix dim=" + std::to_string(rho.dim()) + "\n";
  for (int m = 0; m < rho.dim(); ++m)
    for (int n = 0; n < rho.dim(); ++n) {
      out += std::to_string(m) + ',' + std::to_string(n) + ',';
      append_double(out, rho(m, n).real());
      out += ',';
      append_double(out, rho(m, n).imag());
      out += '\n';
    }
  return out;
}

inline DensityMatrix parse_density(std::string text) {
  LineReader lines(std::move(text));
  std::string_view line;
  if (!lines.next(line)) throw ParseError("empty density-matrix file");
  const auto dim = parse_int(header_field(parse_header(line, "density-matrix"), "dim"), 1);
  if (dim < 1) throw ParseError("dimension must be positive", 1);
  CMatrix m = CMatrix::Zero(dim, dim);
  while (lines.next(line)) {
    if (skippable(line)) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw ParseError("expected m,n,re,im", lines.number());
    const auto r = parse_int(f[0], lines.number());
    const auto c = parse_int(f[1], lines.number());
    if (r < 0 || c < 0 || r >= dim || c >= dim) throw ParseError("index outside dimension", lines.number());
    m(r, c) = Complex(parse_double(f[2], lines.number()), parse_double(f[3], lines.number()));
  }
  return DensityMatrix(m);
}

inline void write_density(const fs::path& path, const DensityMatrix& rho) { write_file(path, format_density(rho)); }
inline DensityMatrix read_density(const fs::path& path) { return parse_density(read_file(path)); }

// ---------------------------------------------------------------- process tensors

inline std::string format_tensor(const ProcessTensor& t) {
  const int d = t.dim();
  std::string out = "# process-tensor dim=" + std::to_string(d) + "\n";
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) {
          const Complex v = t(k, l, m, n);
          if (v == Complex(0.0, 0.0)) continue;
          out += std::to_string(k) + ',' + std::to_string(l) + ',' + std::to_string(m) + ',' + std::to_string(n) + ',';
          append_double(out, v.real());
          out += ',';
          append_double(out, v.imag());
          out += '\n';
        }
  return out;
}

inline ProcessTensor parse_tensor(std::string text) {
  LineReader lines(std::move(text));
  std::string_view line;
  if (!lines.next(line)) throw ParseError("empty process-tensor file");
  const auto dim = parse_int(header_field(parse_header(line, "process-tensor"), "dim"), 1);
  if (dim < 1) throw ParseError("dimension must be positive", 1);
  CMatrix choi = CMatrix::Zero(dim * dim, dim * dim);
  while (lines.next(line)) {
    if (skippable(line)) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw ParseError("expected k,l,m,n,re,im", lines.number());
    std::int64_t idx[4];
    for (int i = 0; i < 4; ++i) {
      idx[i] = parse_int(f[i], lines.number());
      if (idx[i] < 0 || idx[i] >= dim) throw ParseError("index outside dimension", lines.number());
    }
    choi(idx[0] * dim + idx[2], idx[1] * dim + idx[3]) =
        Complex(parse_double(f[4], lines.number()), parse_double(f[5], lines.number()));
  }
  return ProcessTensor(choi);
}

inline void write_tensor(const fs::path& path, const ProcessTensor& t) { write_file(path, format_tensor(t)); }
inline ProcessTensor read_tensor(const fs::path& path) { return parse_tensor(read_file(path)); }

// ---------------------------------------------------------------- quadrature datasets

inline std::string format_dataset(const QuadratureDataset& ds) {
  std::string out = "# quadrature-dataset alpha_re=" + format_double(ds.probe_alpha.real()) +
                    " alpha_im=" + format_double(ds.probe_alpha.imag()) + " seed=" + std::to_string(ds.seed) + "\n";
  out.reserve(out.size() + ds.samples.size() * 44);
  for (const auto& s : ds.samples) {
    append_double(out, s.theta);
    out += ',';
    append_double(out, s.x);
    out += '\n';
  }
  return out;
}

inline QuadratureDataset parse_dataset(std::string text) {
  LineReader lines(std::move(text));
  std::string_view line;
  if (!lines.next(line)) throw ParseError("empty dataset file");
  const auto kv = parse_header(line, "quadrature-dataset");
  QuadratureDataset ds;
  ds.probe_alpha = Complex(parse_double(header_field(kv, "alpha_re"), 1), parse_double(header_field(kv, "alpha_im"), 1));
  ds.seed = parse_uint(header_field(kv, "seed"), 1);
  while (lines.next(line)) {
    if (skippable(line)) continue;
    const auto f = split(line, ',');
    if (f.size() != 2) throw ParseError("expected theta,x", lines.number());
    QuadratureSample s{parse_double(f[0], lines.number()), parse_double(f[1], lines.number())};
    if (!(s.theta >= 0.0 && s.theta < kTwoPi) || !std::isfinite(s.x))
      throw ParseError("sample out of range", lines.number());
    ds.samples.push_back(s);
  }
  if (ds.samples.empty()) throw ParseError("dataset has no samples");
  return ds;
}

inline void write_dataset(const fs::path& path, const QuadratureDataset& ds) { write_file(path, format_dataset(ds)); }
inline QuadratureDataset read_dataset(const fs::path& path) { return parse_dataset(read_file(path)); }

// ---------------------------------------------------------------- manifests

struct ManifestEntry {
  Complex alpha;
  fs::path path;  // as written in the manifest
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> notes;  // extra '#' lines after the header
};

inline std::string format_manifest(const Manifest& m) {
  std::string out = "# manifest\n";
  for (const auto& note : m.notes) out += "# " + note + "\n";
  for (const auto& e : m.entries) {
    append_double(out, e.alpha.real());
    out += ',';
    append_double(out, e.alpha.imag());
    out += ',' + e.path.generic_string() + '\n';
  }
  return out;
}

inline Manifest parse_manifest(std::string text) {
  LineReader lines(std::move(text));
  std::string_view line;
  if (!lines.next(line)) throw ParseError("empty manifest");
  parse_header(line, "manifest");
  Manifest m;
  while (lines.next(line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      m.notes.emplace_back(trim(t.substr(1)));
      continue;
    }
    const auto f = split(t, ',');
    if (f.size() != 3 || f[2].empty()) throw ParseError("expected alpha_re,alpha_im,path", lines.number());
    m.entries.push_back({Complex(parse_double(f[0], lines.number()), parse_double(f[1], lines.number())),
                         fs::path(std::string(f[2]))});
  }
  return m;
}

inline Manifest read_manifest(const fs::path& path) { return parse_manifest(read_file(path)); }

// ---------------------------------------------------------------- Wigner grids

inline std::string format_wigner(const WignerGrid& g) {
  std::string out =
      "# wigner-grid nx=" + std::to_string(g.x_axis.size()) + " ny=" + std::to_string(g.y_axis.size()) + "\n";
  for (std::size_t i = 0; i < g.x_axis.size(); ++i)
    for (std::size_t j = 0; j < g.y_axis.size(); ++j) {
      append_double(out, g.x_axis[i]);
      out += ',';
      append_double(out, g.y_axis[j]);
      out += ',';
      append_double(out, g.values(i, j));
      out += '\n';
    }
  return out;
}

inline WignerGrid parse_wigner(std::string text) {
  LineReader lines(std::move(text));
  std::string_view line;
  if (!lines.next(line)) throw ParseError("empty Wigner file");
  const auto kv = parse_header(line, "wigner-grid");
  const auto nx = parse_int(header_field(kv, "nx"), 1);
  const auto ny = parse_int(header_field(kv, "ny"), 1);
  if (nx < 1 || ny < 1) throw ParseError("grid size must be positive", 1);
  WignerGrid g{std::vector<double>(nx), std::vector<double>(ny), RMatrix(nx, ny)};
  std::int64_t count = 0;
  while (lines.next(line)) {
    if (skippable(line)) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) throw ParseError("expected x,y,w", lines.number());
    if (count >= nx * ny) throw ParseError("more points than the header declares", lines.number());
    const auto i = count / ny;
    const auto j = count % ny;
    g.x_axis[i] = parse_double(f[0], lines.number());
    g.y_axis[j] = parse_double(f[1], lines.number());
    g.values(i, j) = parse_double(f[2], lines.number());
    ++count;
  }
  if (count != nx * ny) throw ParseError("fewer points than the header declares");
  return g;
}

// ---------------------------------------------------------------- configuration

/// Reconstruction and binning settings read from a `key = value` file.
struct RunConfig {
  // Unset fields take the defaults of the reconstruction kind (default_state_config,
  // default_process_config).
  std::optional<int> max_iter;
  std::optional<double> rel_tol;
  std::optional<double> dilution;
  int dim_rec = 7;
  int phase_sections = 20;
  int x_bins = 100;
  double x_min = -5.0;
  double x_max = 5.0;
  std::uint64_t seed = 1;

  MleConfig state_mle() const { return apply(default_state_config()); }
  MleConfig process_mle() const { return apply(default_process_config()); }
  MleConfig apply(MleConfig c) const {
    c.max_iter = max_iter.value_or(c.max_iter);
    c.rel_tol = rel_tol.value_or(c.rel_tol);
    c.dilution = dilution.value_or(c.dilution);
    c.dim = dim_rec;
    return c;
  }
  std::vector<double> edges() const { return uniform_edges(x_min, x_max, x_bins); }
};

inline RunConfig parse_config(std::string text) {
  RunConfig cfg;
  LineReader lines(std::move(text));
  std::string_view line;
  while (lines.next(line)) {
    if (skippable(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", lines.number());
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto n = lines.number();
    if (key == "max_iter") cfg.max_iter = static_cast<int>(parse_int(value, n));
    else if (key == "rel_tol") cfg.rel_tol = parse_double(value, n);
    else if (key == "dilution") cfg.dilution = parse_double(value, n);
    else if (key == "dim_rec") cfg.dim_rec = static_cast<int>(parse_int(value, n));
    else if (key == "phase_sections") cfg.phase_sections = static_cast<int>(parse_int(value, n));
    else if (key == "x_bins") cfg.x_bins = static_cast<int>(parse_int(value, n));
    else if (key == "x_min") cfg.x_min = parse_double(value, n);
    else if (key == "x_max") cfg.x_max = parse_double(value, n);
    else if (key == "seed") cfg.seed = parse_uint(value, n);
    else throw ParseError("unknown config key '" + key + "'", n);
  }
  cfg.state_mle().validate();
  cfg.process_mle().validate();
  if (cfg.phase_sections < 1) throw ParseError("phase_sections must be at least 1");
  if (cfg.x_bins < 1 || !(cfg.x_max > cfg.x_min)) throw ParseError("invalid x binning");
  return cfg;
}

inline RunConfig read_config(const fs::path& path) { return parse_config(read_file(path)); }

// ---------------------------------------------------------------- reports

inline std::string format_process_report(const ProcessAnalysis& a) {
  std::string out = "[diagonal]\nk,m,value\n";
  for (int k = 0; k < a.diagonal.rows(); ++k)
    for (int m = 0; m < a.diagonal.cols(); ++m)
      out += std::to_string(k) + ',' + std::to_string(m) + ',' + format_double(a.diagonal(k, m), 10) + '\n';
  out += "\n[phases]\nk,l,m,n,phase\n";
  for (std::size_t b = 0; b < a.phase_maps.size(); ++b)
    for (const auto& e : a.phase_maps[b])
      out += "0," + std::to_string(b + 1) + ',' + std::to_string(e.m) + ',' + std::to_string(e.n) + ',' +
             format_double(e.phase, 10) + '\n';
  out += "\n[fits]\n";
  out += "eta_hat," + format_double(a.eta_hat, 10) + '\n';
  out += "phi_hat," + format_double(a.phase_fit.phi_hat, 10) + '\n';
  out += "phase_residual," + format_double(a.phase_fit.residual, 10) + '\n';
  for (const auto& b : a.phase_fit.per_block_means)
    out += "block_mean_" + std::to_string(b.k) + '_' + std::to_string(b.l) + ',' + format_double(b.mean, 10) + '\n';
  out += "\n[fidelity]\n";
  out += "model_full," + format_double(a.vs_model.full, 10) + '\n';
  out += "model_diagonal," + format_double(a.vs_model.diagonal, 10) + '\n';
  if (a.vs_reference) {
    out += "reference_full," + format_double(a.vs_reference->full, 10) + '\n';
    out += "reference_diagonal," + format_double(a.vs_reference->diagonal, 10) + '\n';
  }
  return out;
}

/// `name,value` rows of one report section, for rows whose value is a single number.
inline std::map<std::string, double> report_section(const std::string& text, const std::string& section) {
  std::map<std::string, double> out;
  LineReader lines(text);
  std::string_view line;
  bool inside = false;
  while (lines.next(line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      inside = line == "[" + section + "]";
      continue;
    }
    if (!inside) continue;
    const auto f = split(line, ',');
    if (f.size() != 2) continue;
    out[std::string(f[0])] = parse_double(f[1], lines.number());
  }
  return out;
}

}  // namespace csqpt::io
