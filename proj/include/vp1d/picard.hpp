#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "vp1d/characteristics.hpp"
#include "vp1d/errors.hpp"
#include "vp1d/field.hpp"
#include "vp1d/grid.hpp"
#include "vp1d/parallel.hpp"
#include "vp1d/profiles.hpp"

namespace vp1d {

struct SolverOptions {
  std::size_t substeps = kDefaultSubsteps;
  double tol = 1e-10;
  std::size_t max_iters = 25;
  TailMode tail = TailMode::PowerLaw;
  Execution execution = Execution::Parallel;
  /// Record the per-node Duhamel residual of every map application.
  bool record_duhamel = true;
  /// Keep every iterate in SolveResult::iterates (memory heavy).
  bool keep_iterates = false;
};

/// f, rho and E on the full space-velocity-time grid. The field is a
/// timeline of windows: all but the last are frozen history from earlier
/// solves; the last one is the field built from this history's own density.
struct SolutionHistory {
  PhaseGrid grid;
  std::vector<double> f;  ///< index (m * nx + j) * nv + i
  std::vector<DensitySnapshot> density;  ///< one per time node
  FieldTimeline fields;
  std::string origin;
  /// g~ - g0(X0, V0) + trapezoid in s of E F'(V) along the path, per node;
  /// empty unless recorded.
  std::vector<double> duhamel;
  std::size_t paths_left_box = 0;

  PhaseView slice(std::size_t m) const {
    return PhaseView{std::span<const double>(f).subspan(m * grid.slice_size(), grid.slice_size()), grid.nx(),
                     grid.nv()};
  }
  double f_at(std::size_t m, std::size_t j, std::size_t i) const {
    return f[(m * grid.nx() + j) * grid.nv() + i];
  }
  /// Grid time index where the last field window starts.
  std::size_t active_start() const;
  /// Field snapshot at grid time index m.
  const FieldSnapshot& field_at(std::size_t m) const;
  /// Window time of grid node m (bitwise the time used by the flows).
  double time_at(std::size_t m) const;
};

struct ContractionFit {
  bool valid = false;
  double log_prefactor = 0.0;  ///< log C4
  double rate = 0.0;           ///< C3 * segment length
  double c3 = 0.0;
};

/// Least-squares fit of log d_k + log k! = log C4 + k log(C3 * length).
ContractionFit fit_contraction(const std::vector<double>& distances, double segment_length);

struct IterationTrace {
  std::vector<double> distances;      ///< d_k = sup_t ||(rho^(k+1) - rho^(k))(t)||_p
  std::vector<double> ratios;         ///< d_{k+1} / d_k
  std::vector<double> field_impulse;  ///< C1 of iterate k+1
  std::vector<std::vector<double>> triple_norms;  ///< ||| g^(k+1)(t_m) ||| per m
  bool converged = false;
  std::size_t iterations = 0;
  double segment_start = 0.0;
  double segment_length = 0.0;
  ContractionFit fit;
  double norm_cap = 0.0;
  bool within_norm_cap = true;
  std::size_t paths_left_box = 0;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, IterationTrace trace, std::shared_ptr<SolutionHistory> last)
      : Error(what), trace_(std::move(trace)), last_(std::move(last)) {}
  const IterationTrace& trace() const noexcept { return trace_; }
  const std::shared_ptr<SolutionHistory>& last_iterate() const noexcept { return last_; }

 private:
  IterationTrace trace_;
  std::shared_ptr<SolutionHistory> last_;
};

struct SolveResult {
  SolutionHistory solution;
  IterationTrace trace;
  std::vector<SolutionHistory> iterates;  ///< f^(0), f^(1), ... if requested
};

/// f^(0): the initial slice frozen in time, with its own constant field.
SolutionHistory initial_iterate(const InitialData& data, const PhaseGrid& grid, TailMode tail);

/// One application of the fixed-point map on the last field window: every
/// node is pulled back along the characteristics of the input field and f0
/// is evaluated at the foot.
SolutionHistory apply_map(const SolutionHistory& iterate, const InitialData& data, const SolverOptions& options);

/// sup over time nodes m >= from of ||(a - b)(t_m)||_p.
double density_distance(const SolutionHistory& a, const SolutionHistory& b, std::size_t from = 0);

/// Picard iteration from f^(0) until d_k < tol * max(1, d_0). Throws
/// NonConvergence after max_iters maps.
SolveResult solve(const InitialData& data, const PhaseGrid& grid, const SolverOptions& options);

/// Continues a solution on [0, T] to [0, T + delta] with the earlier field
/// history frozen. delta must be a whole number of time steps. Throws
/// ContinuationRefused if sup_t |||g(t)||| > norm_cap on [0, T].
SolveResult extend(const SolutionHistory& solution, const InitialData& data, double delta, double norm_cap,
                   const SolverOptions& options);

/// ||| (F - f)(t_m) ||| for every time node.
std::vector<double> triple_norm_history(const SolutionHistory& solution, const BackgroundProfile& background,
                                        double p);

}  // namespace vp1d
