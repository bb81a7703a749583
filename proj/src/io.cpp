#include "vp1d/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "vp1d/errors.hpp"

namespace vp1d {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kKnownKeys = {
    "W",        "A_F",       "A_g",   "p",          "shape",          "L",           "Nx",
    "Vmax",     "Nv",        "T_end", "Nt",         "substeps",       "tol",         "max_iters",
    "norm_cap", "tail",      "out",   "lemma1_samples", "probe_count", "lemma2_B",  "extend_delta",
    "resolutions", "write_solution"};

// Pulls typed values out of the document, recording every problem instead
// of stopping at the first.
class Reader {
 public:
  explicit Reader(const nlohmann::json& doc) : doc_(doc) {}

  void real(const char* key, double& out) {
    if (!doc_.contains(key)) return;
    const auto& v = doc_.at(key);
    if (!v.is_number()) {
      problems.push_back(std::string(key) + ": expected a number");
      return;
    }
    out = v.get<double>();
    if (!std::isfinite(out)) problems.push_back(std::string(key) + ": not finite");
  }

  void count(const char* key, std::size_t& out) {
    if (!doc_.contains(key)) return;
    const auto& v = doc_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      problems.push_back(std::string(key) + ": expected a non-negative integer");
      return;
    }
    out = v.get<std::size_t>();
  }

  void text(const char* key, std::string& out) {
    if (!doc_.contains(key)) return;
    const auto& v = doc_.at(key);
    if (!v.is_string()) {
      problems.push_back(std::string(key) + ": expected a string");
      return;
    }
    out = v.get<std::string>();
  }

  void flag(const char* key, bool& out) {
    if (!doc_.contains(key)) return;
    const auto& v = doc_.at(key);
    if (!v.is_boolean()) {
      problems.push_back(std::string(key) + ": expected true or false");
      return;
    }
    out = v.get<bool>();
  }

  void require(bool ok, const std::string& message) {
    if (!ok) problems.push_back(message);
  }

  std::vector<std::string> problems;

 private:
  const nlohmann::json& doc_;
};

bool odd_at_least(std::size_t n, std::size_t lo) { return n >= lo && n % 2 == 1; }

void check_grid(Reader& r, const std::string& where, std::size_t nx, std::size_t nv, std::size_t nt) {
  r.require(odd_at_least(nx, 5), where + "Nx must be odd and >= 5");
  r.require(odd_at_least(nv, 3), where + "Nv must be odd and >= 3");
  r.require(nt >= 2, where + "Nt must be >= 2");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void append_real(std::string& out, double value) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  out.append(buf.data(), res.ptr);
}

// Splits one CSV line into doubles; returns false on malformed input.
bool parse_row(std::string_view line, std::vector<double>& values) {
  values.clear();
  while (!line.empty()) {
    const auto comma = line.find(',');
    const auto cell = line.substr(0, comma);
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) return false;
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return true;
}

std::vector<std::vector<double>> read_csv(const fs::path& path, std::size_t columns) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> cols(columns);
  std::vector<double> row;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!parse_row(line, row) || row.size() != columns) {
      throw InvalidProfile(path.string() + ": malformed line " + std::to_string(line_no));
    }
    for (std::size_t c = 0; c < columns; ++c) cols[c].push_back(row[c]);
  }
  return cols;
}

std::string index_name(const char* prefix, std::size_t m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu.csv", prefix, m);
  return buf;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError({"configuration must be a JSON object"});
  RunConfig c;
  Reader r(doc);
  for (const auto& item : doc.items()) {
    if (!kKnownKeys.count(item.key())) r.problems.push_back(item.key() + ": unknown key");
  }
  r.real("W", c.support_radius);
  r.real("A_F", c.background_amplitude);
  r.real("A_g", c.perturbation_amplitude);
  r.real("p", c.exponent);
  r.text("shape", c.shape);
  r.real("L", c.grid.x_half_width);
  r.count("Nx", c.grid.x_count);
  r.real("Vmax", c.grid.v_half_width);
  r.count("Nv", c.grid.v_count);
  r.real("T_end", c.grid.time_horizon);
  r.count("Nt", c.grid.time_count);
  r.count("substeps", c.substeps);
  r.real("tol", c.tol);
  r.count("max_iters", c.max_iters);
  r.real("norm_cap", c.norm_cap);
  std::string tail = to_string(c.tail);
  r.text("tail", tail);
  r.text("out", c.output_dir);
  r.count("lemma1_samples", c.lemma1_samples);
  r.count("probe_count", c.probe_count);
  r.real("lemma2_B", c.lemma2_bound);
  r.real("extend_delta", c.extend_delta);
  r.flag("write_solution", c.write_solution);

  if (doc.contains("resolutions")) {
    const auto& list = doc.at("resolutions");
    if (!list.is_array()) {
      r.problems.push_back("resolutions: expected an array of [Nx, Nv, Nt] triples");
    } else {
      for (std::size_t k = 0; k < list.size(); ++k) {
        const auto& e = list[k];
        const bool ok = e.is_array() && e.size() == 3 &&
                        std::all_of(e.begin(), e.end(), [](const auto& n) {
                          return n.is_number_integer() && n.template get<long long>() > 0;
                        });
        if (!ok) {
          r.problems.push_back("resolutions[" + std::to_string(k) + "]: expected [Nx, Nv, Nt]");
          continue;
        }
        Resolution res{e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<std::size_t>()};
        check_grid(r, "resolutions[" + std::to_string(k) + "]: ", res.nx, res.nv, res.nt);
        c.resolutions.push_back(res);
      }
    }
  }

  r.require(c.support_radius > 0.0, "W must be positive");
  r.require(c.background_amplitude > 0.0, "A_F must be positive");
  r.require(c.exponent > 1.0, "p must be > 1");
  r.require(c.shape == "separable-bump" || c.shape == "narrow-bump",
            "shape must be \"separable-bump\" or \"narrow-bump\"");
  r.require(c.grid.x_half_width > 0.0, "L must be positive");
  r.require(c.grid.v_half_width > c.support_radius, "Vmax must exceed W");
  check_grid(r, "", c.grid.x_count, c.grid.v_count, c.grid.time_count);
  r.require(c.grid.time_horizon > 0.0, "T_end must be positive");
  r.require(c.substeps >= 1, "substeps must be >= 1");
  r.require(c.tol > 0.0, "tol must be positive");
  r.require(c.max_iters >= 1, "max_iters must be >= 1");
  r.require(c.norm_cap >= 0.0, "norm_cap must be >= 0");
  try {
    c.tail = tail_mode_from_string(tail);
  } catch (const Error&) {
    r.problems.push_back("tail must be \"power-law\" or \"zero\"");
  }
  r.require(c.lemma1_samples >= 1, "lemma1_samples must be >= 1");
  r.require(c.probe_count >= 3, "probe_count must be >= 3");
  r.require(c.lemma2_bound > 0.0, "lemma2_B must be positive");
  r.require(!c.output_dir.empty(), "out must not be empty");
  if (c.grid.time_count >= 2 && c.grid.time_horizon > 0.0) {
    const double dt = c.grid.time_horizon / static_cast<double>(c.grid.time_count - 1);
    const double steps = std::round(c.extend_delta / dt);
    r.require(c.extend_delta > 0.0 && steps >= 1.0 &&
                  std::abs(steps * dt - c.extend_delta) <= 1e-9 * std::max(1.0, c.extend_delta),
              "extend_delta must be a positive multiple of the time step");
  }
  if (!r.problems.empty()) throw ConfigError(std::move(r.problems));
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path.string()});
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({"config is not valid JSON: " + std::string(e.what())});
  }
  return parse_config(doc);
}

ojson config_to_json(const RunConfig& c) {
  ojson j;
  j["W"] = c.support_radius;
  j["A_F"] = c.background_amplitude;
  j["A_g"] = c.perturbation_amplitude;
  j["p"] = c.exponent;
  j["shape"] = c.shape;
  j["L"] = c.grid.x_half_width;
  j["Nx"] = c.grid.x_count;
  j["Vmax"] = c.grid.v_half_width;
  j["Nv"] = c.grid.v_count;
  j["T_end"] = c.grid.time_horizon;
  j["Nt"] = c.grid.time_count;
  j["substeps"] = c.substeps;
  j["tol"] = c.tol;
  j["max_iters"] = c.max_iters;
  j["norm_cap"] = c.norm_cap;
  j["tail"] = to_string(c.tail);
  j["lemma1_samples"] = c.lemma1_samples;
  j["probe_count"] = c.probe_count;
  j["lemma2_B"] = c.lemma2_bound;
  j["extend_delta"] = c.extend_delta;
  j["resolutions"] = ojson::array();
  for (const auto& r : c.resolutions) j["resolutions"].push_back({r.nx, r.nv, r.nt});
  j["write_solution"] = c.write_solution;
  return j;
}

PhaseGrid make_grid(const RunConfig& config) { return PhaseGrid(config.grid); }

PhaseGrid make_grid(const RunConfig& config, const Resolution& resolution) {
  PhaseGridParams params = config.grid;
  params.x_count = resolution.nx;
  params.v_count = resolution.nv;
  params.time_count = resolution.nt;
  return PhaseGrid(params);
}

SolverOptions make_solver_options(const RunConfig& config) {
  SolverOptions options;
  options.substeps = config.substeps;
  options.tol = config.tol;
  options.max_iters = config.max_iters;
  options.tail = config.tail;
  return options;
}

InitialData make_initial_data(const RunConfig& config, const PhaseGrid& grid) {
  const auto background = make_background(config.support_radius, config.background_amplitude);
  return make_initial_data(background, config.perturbation_amplitude, config.exponent, config.shape, grid);
}

std::string format_real(double value) {
  std::string out;
  append_real(out, value);
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw IoFailure("sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < length; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xf];
  }
  return out;
}

ArtifactDir::ArtifactDir(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw IoFailure("cannot create " + root_.string() + ": " + ec.message());
}

void ArtifactDir::write(const std::string& relative, std::string_view content) {
  const fs::path path = root_ / relative;
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoFailure("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoFailure("cannot write " + path.string());
  entries_.push_back(ManifestEntry{relative, content.size(), sha256_hex(content)});
}

void ArtifactDir::write_json(const std::string& relative, const ojson& doc) { write(relative, doc.dump(2) + "\n"); }

void ArtifactDir::write_manifest(const std::string& name, ojson header) const {
  header["files"] = ojson::array();
  for (const auto& e : entries_) {
    header["files"].push_back({{"path", e.path}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  }
  const std::string content = header.dump(2) + "\n";
  const fs::path path = root_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) throw IoFailure("cannot write " + path.string());
}

std::string solution_file(std::size_t m) { return "solution/" + index_name("f", m); }
std::string field_file(std::size_t m) { return "fields/" + index_name("field", m); }

std::string solution_csv(const SolutionHistory& solution, std::size_t m) {
  const auto& grid = solution.grid;
  std::string out = "x,v,f\n";
  out.reserve(grid.slice_size() * 64);
  const auto slice = solution.slice(m);
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    for (std::size_t i = 0; i < grid.nv(); ++i) {
      append_real(out, grid.x()[j]);
      out += ',';
      append_real(out, grid.v()[i]);
      out += ',';
      append_real(out, slice(j, i));
      out += '\n';
    }
  }
  return out;
}

std::string field_csv(const SolutionHistory& solution, std::size_t m) {
  const auto& grid = solution.grid;
  const auto& rho = solution.density[m].rho;
  const auto& E = solution.field_at(m).E;
  std::string out = "x,rho,E\n";
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    append_real(out, grid.x()[j]);
    out += ',';
    append_real(out, rho[j]);
    out += ',';
    append_real(out, E[j]);
    out += '\n';
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "t,rho_norm,max_abs_E,Q_meas,triple_norm\n";
  for (const auto& r : rows) {
    for (double v : {r.t, r.rho_norm, r.max_abs_E, r.support}) {
      append_real(out, v);
      out += ',';
    }
    append_real(out, r.triple_norm);
    out += '\n';
  }
  return out;
}

std::string probes_csv(const std::vector<ProbeRow>& rows) {
  std::string out = "x,value,weighted\n";
  for (const auto& r : rows) {
    append_real(out, r.x);
    out += ',';
    append_real(out, r.value);
    out += ',';
    append_real(out, r.weighted);
    out += '\n';
  }
  return out;
}

ojson trace_json(const IterationTrace& trace) {
  ojson j;
  j["converged"] = trace.converged;
  j["iterations"] = trace.iterations;
  j["segment_start"] = trace.segment_start;
  j["segment_length"] = trace.segment_length;
  j["distances"] = trace.distances;
  j["ratios"] = trace.ratios;
  j["C1_meas"] = trace.field_impulse;
  j["fit"] = {{"valid", trace.fit.valid},
              {"log_prefactor", trace.fit.log_prefactor},
              {"rate", trace.fit.rate},
              {"C3", trace.fit.c3}};
  j["sup_triple_norm"] = ojson::array();
  for (const auto& norms : trace.triple_norms) {
    double sup = 0.0;
    for (double v : norms) sup = std::max(sup, v);
    j["sup_triple_norm"].push_back(sup);
  }
  j["norm_cap"] = trace.norm_cap;
  j["within_norm_cap"] = trace.within_norm_cap;
  j["paths_left_box"] = trace.paths_left_box;
  return j;
}

ojson lemma_report_json(const LemmaReport& report) {
  ojson j;
  j["lemma"] = report.lemma;
  j["samples"] = report.samples;
  j["worst_violation"] = report.worst_violation;
  j["constants"] = ojson::object();
  for (const auto& [key, value] : report.constants) j["constants"][key] = value;
  j["pass"] = report.pass;
  j["notes"] = report.notes;
  return j;
}

void write_solution_artifacts(ArtifactDir& dir, const SolutionHistory& solution, const InitialData& data,
                              const std::vector<IterationTrace>& traces, bool write_solution) {
  ojson trace_doc = ojson::array();
  for (const auto& t : traces) trace_doc.push_back(trace_json(t));
  dir.write_json("trace.json", trace_doc);
  dir.write("summary.csv", summary_csv(summarize(solution, data)));
  for (std::size_t m = 0; m < solution.grid.nt(); ++m) dir.write(field_file(m), field_csv(solution, m));
  if (write_solution) {
    for (std::size_t m = 0; m < solution.grid.nt(); ++m) dir.write(solution_file(m), solution_csv(solution, m));
  }
}

FieldTable read_field_csv(const fs::path& path) {
  auto cols = read_csv(path, 3);
  FieldTable table;
  table.x = std::move(cols[0]);
  table.rho = std::move(cols[1]);
  table.E = std::move(cols[2]);
  return table;
}

Manifest read_manifest(const fs::path& dir, const std::string& name) {
  const fs::path path = dir / name;
  if (!fs::exists(path)) throw MissingArtifact("no " + name + " in " + dir.string());
  ojson doc;
  try {
    doc = ojson::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw MissingArtifact(path.string() + " is not valid JSON: " + e.what());
  }
  Manifest manifest;
  manifest.parameters = doc.value("parameters", ojson::object());
  if (!doc.contains("files") || !doc["files"].is_array()) throw MissingArtifact(path.string() + " lists no files");
  for (const auto& e : doc["files"]) {
    ManifestEntry entry{e.value("path", ""), e.value("bytes", std::size_t{0}), e.value("sha256", "")};
    if (!fs::exists(dir / entry.path)) throw MissingArtifact("listed artifact missing: " + entry.path);
    manifest.files.push_back(std::move(entry));
  }
  return manifest;
}

SolutionHistory load_solution(const fs::path& dir, const PhaseGrid& grid, const InitialData& data, TailMode tail) {
  SolutionHistory sol;
  sol.grid = grid;
  sol.origin = "loaded";
  sol.f.resize(grid.nt() * grid.slice_size());
  for (std::size_t m = 0; m < grid.nt(); ++m) {
    const fs::path path = dir / solution_file(m);
    if (!fs::exists(path)) throw MissingArtifact("missing solution file " + path.string());
    const auto cols = read_csv(path, 3);
    if (cols[2].size() != grid.slice_size()) {
      throw InvalidProfile(path.string() + ": expected " + std::to_string(grid.slice_size()) + " rows");
    }
    std::copy(cols[2].begin(), cols[2].end(), sol.f.begin() + static_cast<std::ptrdiff_t>(m * grid.slice_size()));
  }
  const DensityIntegrator integrate(grid, data.background(), data.exponent());
  sol.density.resize(grid.nt());
  for (std::size_t m = 0; m < grid.nt(); ++m) sol.density[m] = integrate(sol.slice(m), grid.t()[m]);
  sol.fields = FieldTimeline(
      std::make_shared<const FieldHistory>(build_field_history(sol.density, grid.x(), grid.t(), tail)));
  return sol;
}

}  // namespace vp1d
