#pragma once

// Numerical counterparts of the a-priori estimates: measured constants,
// sampled inequality checks and decay/growth trend fits. Every experiment is
// deterministic for a given solution (sampling uses a Halton sequence).

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "vp1d/characteristics.hpp"
#include "vp1d/field.hpp"
#include "vp1d/grid.hpp"
#include "vp1d/picard.hpp"
#include "vp1d/profiles.hpp"

namespace vp1d {

/// Largest running integral of sup_x |E(s, x)| from 0, trapezoid in s over
/// the snapshot times of every window.
double field_impulse(const FieldTimeline& timeline);
double field_impulse(const FieldHistory& history);

struct LemmaReport {
  std::string lemma;
  std::size_t samples = 0;
  /// Largest signed slack (bound violated when > 0).
  double worst_violation = 0.0;
  std::map<std::string, double> constants;
  bool pass = false;
  std::string notes;
};

/// Halton point k (k >= 1) in the given prime base.
double halton(std::size_t index, unsigned base);

struct Lemma1Options {
  std::size_t samples = 10000;
  std::size_t substeps = kDefaultSubsteps;
  /// Multiplies the measured impulse; values > 1 weaken the bound.
  double impulse_scale = 1.0;
  Execution execution = Execution::Parallel;
};

/// Samples (s, t, x, v) and checks |v| - C1 - eps <= |V(s)| <= |v| + C1 + eps
/// and, for |v| > 2 C1, |v|/2 - eps <= |V(s)| <= 3|v|/2 + eps, with eps = 10x
/// the substep-halving difference.
LemmaReport check_lemma1(const SolutionHistory& solution, const Lemma1Options& options = {});

/// Test field for the weighted-integral experiment: |field| <= B and
/// |field'| <= B R^{-p}, paired with the C^2 bump H(v) = (1 - v^2/W_H^2)^3.
struct SyntheticFieldSpec {
  std::string family = "arctan";  ///< "arctan" or "constant"
  double bound = 1.0;             ///< B
  double exponent = 2.0;          ///< p
  double bump_radius = 1.0;       ///< W_H

  double field(double x) const;
  double field_derivative(double x) const;
  double bump(double v) const;
  double bump_derivative(double v) const;

  /// Dense-grid check of both bounds with 1% slack; returns
  /// {max|field|/B, max|field'| R^p / B}.
  std::pair<double, double> verify(double half_width = 50.0, std::size_t nodes = 20001) const;
};

struct ProbeRow {
  double x = 0.0;
  double value = 0.0;     ///< the integral at this probe
  double weighted = 0.0;  ///< value * R^p(x); for field differences, also divided by the density distance
};

struct WeightedIntegralReport {
  LemmaReport report;
  std::vector<ProbeRow> probes;
};

/// log-log slope of the weighted values against R(x) over probes with
/// x >= half of the largest probe; zero rows are skipped.
double outer_growth_slope(const std::vector<ProbeRow>& rows);

/// Probes x in [0, L] spaced uniformly.
std::vector<double> uniform_probes(double half_width, std::size_t count);

struct Lemma2Options {
  std::size_t v_nodes = 401;
  std::size_t substeps = kDefaultSubsteps;
  double slope_limit = 0.1;
};

/// |int field(X(s,t,x,v)) H'(V(s,t,x,v)) dv| over the probes, flows taken in
/// the timeline. Pass iff the outer log-log growth slope is <= slope_limit.
WeightedIntegralReport check_lemma2(const SyntheticFieldSpec& spec, const FieldTimeline& timeline,
                                    const std::vector<double>& probes, double s, double t,
                                    const Lemma2Options& options = {});

struct Lemma4Options {
  std::size_t substeps = kDefaultSubsteps;
  double slope_limit = 0.1;
};

/// |int (E_A - E_B)(s, X) d_v g~_B(s, X, V) dv| / (||(rho_A - rho_B)(s)||_p R^{-p}(x))
/// with flows in A's field from time node t_index to s_index. Throws
/// InvalidComparison if the grids or time axes differ.
WeightedIntegralReport check_lemma4(const SolutionHistory& a, const SolutionHistory& b,
                                    const BackgroundProfile& background, std::size_t s_index,
                                    std::size_t t_index, const std::vector<double>& probes,
                                    const Lemma4Options& options = {});

/// Decay exponent of |sigma| ~ R^{-q} from a least-squares fit over the outer
/// half of the box. Throws InsufficientData with fewer than 3 usable nodes.
double decay_fit(const WeightedProfile& sigma, const SymmetricAxis& x);

struct SupportCurve {
  std::vector<double> raw;       ///< largest |v_i| carrying |g| > 1e-12 at t_m (0 if none)
  std::vector<double> envelope;  ///< running max of raw
  std::vector<double> clamped;   ///< max(envelope, W)
};

SupportCurve support_curve(const SolutionHistory& solution, const BackgroundProfile& background);

/// Weighted sup over (t, x) of the Simpson v-integral of the recorded
/// per-node Duhamel residual. Throws InsufficientData if none was recorded.
double duhamel_density_residual(const SolutionHistory& solution);

struct ChargeDrift {
  std::vector<double> drift;  ///< |Q_box(t) - Q_box(0)|
  std::vector<double> flux_bound;  ///< int_0^t |j(s, -L)| + |j(s, L)| ds
};

ChargeDrift charge_drift(const SolutionHistory& solution, const BackgroundProfile& background);

/// max |det D(X0,V0)/D(x,v) - 1| over `samples` Halton points of the last
/// field window.
double volume_defect(const SolutionHistory& solution, std::size_t samples,
                     std::size_t substeps = kDefaultSubsteps);

/// (|d_v g| + |d_x g|)(s, X(s), V(s)) sampled at every time node along the
/// backward path from (t_m, x, v).
std::vector<double> derivative_monitor(const SolutionHistory& solution, const BackgroundProfile& background,
                                       std::size_t t_index, double x, double v,
                                       std::size_t substeps = kDefaultSubsteps);

/// Per-time summary used by the CSV export.
struct SummaryRow {
  double t = 0.0;
  double rho_norm = 0.0;
  double max_abs_E = 0.0;
  double support = 0.0;
  double triple_norm = 0.0;
};

std::vector<SummaryRow> summarize(const SolutionHistory& solution, const InitialData& data);

}  // namespace vp1d
