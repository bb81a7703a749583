#pragma once

// Run configuration, artifact files and the manifest.
//
// Layout of an output directory written by a solve:
//   manifest.json            parameters + sha256 of every file below
//   trace.json               Picard distances, ratios, C1 and the fitted rate
//   summary.csv              t, rho_norm, max_abs_E, Q_meas, triple_norm
//   fields/field_MMMM.csv    x, rho, E at time node MMMM
//   solution/f_MMMM.csv      x, v, f at time node MMMM
// Reals are printed with 17 significant digits so files round-trip exactly.

#include <cstddef>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vp1d/diagnostics.hpp"
#include "vp1d/field.hpp"
#include "vp1d/grid.hpp"
#include "vp1d/picard.hpp"
#include "vp1d/profiles.hpp"

namespace vp1d {

using ojson = nlohmann::ordered_json;

struct Resolution {
  std::size_t nx = 0;
  std::size_t nv = 0;
  std::size_t nt = 0;
};

struct RunConfig {
  // background and perturbation
  double support_radius = 1.0;  ///< W
  double background_amplitude = 1.0;  ///< A_F
  double perturbation_amplitude = 0.05;  ///< A_g
  double exponent = 2.0;  ///< p
  std::string shape = "separable-bump";
  // grid
  PhaseGridParams grid;
  std::size_t substeps = kDefaultSubsteps;
  // solver
  double tol = 1e-10;
  std::size_t max_iters = 25;
  double norm_cap = 1e6;
  TailMode tail = TailMode::PowerLaw;
  // subcommands
  std::size_t lemma1_samples = 10000;
  std::size_t probe_count = 41;
  double lemma2_bound = 1.0;
  double extend_delta = 0.25;
  std::vector<Resolution> resolutions;
  bool write_solution = true;
  std::string output_dir = "out";
};

/// Parses a flat JSON object. Unknown keys, wrong types and out-of-range
/// values are all collected into one ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
/// Reads and parses a config file; an unreadable file is a ConfigError.
RunConfig load_config(const std::filesystem::path& path);
/// Every effective parameter, in a fixed key order.
ojson config_to_json(const RunConfig& config);

PhaseGrid make_grid(const RunConfig& config);
PhaseGrid make_grid(const RunConfig& config, const Resolution& resolution);
SolverOptions make_solver_options(const RunConfig& config);
/// Throws PositivityViolation / InvalidParameter from the profile checks.
InitialData make_initial_data(const RunConfig& config, const PhaseGrid& grid);

/// %.17g without locale dependence.
std::string format_real(double value);
std::string sha256_hex(std::string_view bytes);

struct ManifestEntry {
  std::string path;
  std::size_t bytes = 0;
  std::string sha256;
};

/// Output directory that remembers what it wrote so that a manifest can be
/// emitted last. Throws IoFailure when a file cannot be written.
class ArtifactDir {
 public:
  explicit ArtifactDir(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  void write(const std::string& relative, std::string_view content);
  void write_json(const std::string& relative, const ojson& doc);
  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }

  /// Writes `name` with the given header fields plus a "files" array. The
  /// manifest itself is not listed.
  void write_manifest(const std::string& name, ojson header) const;

 private:
  std::filesystem::path root_;
  std::vector<ManifestEntry> entries_;
};

std::string solution_csv(const SolutionHistory& solution, std::size_t m);
std::string field_csv(const SolutionHistory& solution, std::size_t m);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string probes_csv(const std::vector<ProbeRow>& rows);

ojson trace_json(const IterationTrace& trace);
ojson lemma_report_json(const LemmaReport& report);

std::string solution_file(std::size_t m);
std::string field_file(std::size_t m);

/// Writes trace, summary, field and (optionally) solution files.
void write_solution_artifacts(ArtifactDir& dir, const SolutionHistory& solution, const InitialData& data,
                              const std::vector<IterationTrace>& traces, bool write_solution);

struct FieldTable {
  std::vector<double> x;
  std::vector<double> rho;
  std::vector<double> E;
};

/// Reads a field CSV. Throws MissingArtifact if absent, InvalidProfile if
/// malformed.
FieldTable read_field_csv(const std::filesystem::path& path);

struct Manifest {
  ojson parameters;
  std::vector<ManifestEntry> files;
};

/// Throws MissingArtifact if the manifest or a listed file is absent.
Manifest read_manifest(const std::filesystem::path& dir, const std::string& name = "manifest.json");

/// Rebuilds a solution from its f CSVs: densities and one field window are
/// recomputed from f exactly as the solver does.
SolutionHistory load_solution(const std::filesystem::path& dir, const PhaseGrid& grid, const InitialData& data,
                              TailMode tail);

}  // namespace vp1d
