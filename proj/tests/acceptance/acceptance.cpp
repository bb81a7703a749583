// Acceptance suite: one PASS/FAIL line per criterion on the default
// benchmark (W = 1, A_F = 1, A_g = 0.05, p = 2, L = 20, Nx = 401, Vmax = 4,
// Nv = 129, T = 0.5, Nt = 51, tol = 1e-10). Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "vp1d/diagnostics.hpp"
#include "vp1d/errors.hpp"
#include "vp1d/io.hpp"
#include "vp1d/oracle.hpp"
#include "vp1d/parallel.hpp"
#include "vp1d/picard.hpp"

using namespace vp1d;
namespace fs = std::filesystem;

namespace {

// Pinned from the three-level refinement study (101/33/13, 201/65/26,
// 401/129/51): 5.8e-3, 7.4e-4, 1.3e-4. The two coarse levels extrapolate
// to about 1e-4 at the benchmark; the pin allows a factor 2 above that.
constexpr double kTolCross = 2e-4;

struct Level {
  std::size_t nx, nv, nt;
};

constexpr Level kBenchmark{401, 129, 51};
constexpr Level kHalf{201, 65, 26};
constexpr Level kQuarter{101, 33, 13};

PhaseGrid make(const Level& level, double horizon = 0.5) {
  return PhaseGrid(PhaseGridParams{20.0, level.nx, 4.0, level.nv, horizon, level.nt});
}

InitialData benchmark_data(const PhaseGrid& grid, double amplitude = 0.05) {
  return make_initial_data(make_background(1.0, 1.0), amplitude, 2.0, "separable-bump", grid);
}

struct Tally {
  int failed = 0;
  void report(int id, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failed;
  }
};

template <class... Args>
std::string fmt(const char* pattern, Args... args) {
  char buf[768];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

void note(const std::string& text) {
  std::printf("  .. %s\n", text.c_str());
  std::fflush(stdout);
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

// max |fine - coarse| over the nodes the coarse grid shares with the fine one
double common_node_gap(const SolutionHistory& fine, const SolutionHistory& coarse) {
  const auto& fg = fine.grid;
  const auto& cg = coarse.grid;
  const std::size_t rx = (fg.nx() - 1) / (cg.nx() - 1);
  const std::size_t rv = (fg.nv() - 1) / (cg.nv() - 1);
  const std::size_t rt = (fg.nt() - 1) / (cg.nt() - 1);
  double worst = 0.0;
  for (std::size_t m = 0; m < cg.nt(); ++m)
    for (std::size_t j = 0; j < cg.nx(); ++j)
      for (std::size_t i = 0; i < cg.nv(); ++i)
        worst = std::max(worst, std::abs(fine.f_at(m * rt, j * rx, i * rv) - coarse.f_at(m, j, i)));
  return worst;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Worst |D_x E - rho| over all time nodes.
double field_fd_error(const SolutionHistory& sol, bool& consistent) {
  double worst = 0.0;
  for (std::size_t m = 0; m < sol.grid.nt(); ++m) {
    const auto c = check_field_density(sol.field_at(m).E, sol.density[m].rho, sol.grid.x());
    if (c.max_error > c.expected_error * (1.0 + 1e-6) + 1e-14) consistent = false;
    if (c.box_mass_error > 1e-10 * sol.density[m].weighted_norm + 1e-15) consistent = false;
    worst = std::max(worst, c.max_error);
  }
  return worst;
}

void criterion_trivial(Tally& tally) {
  Stopwatch clock;
  const auto grid = make(kBenchmark);
  const auto data = benchmark_data(grid, 0.0);
  const auto result = solve(data, grid, SolverOptions{});
  double rho = 0.0, field = 0.0, df = 0.0;
  for (std::size_t m = 0; m < grid.nt(); ++m) {
    for (double r : result.solution.density[m].rho) rho = std::max(rho, std::abs(r));
    field = std::max(field, result.solution.field_at(m).sup_abs());
  }
  const auto f0 = data.sample_f0(grid);
  for (std::size_t m = 0; m < grid.nt(); ++m)
    for (std::size_t k = 0; k < f0.size(); ++k) {
      const double v = grid.v()[k % grid.nv()];
      df = std::max(df, std::abs(result.solution.f[m * grid.slice_size() + k] - data.background().value(v)));
    }
  const bool pass = rho <= 1e-12 && field <= 1e-12 && df <= 1e-12 && result.trace.iterations == 1;
  tally.report(1, pass,
               fmt("trivial fixed point max|rho|=%.3g max|E|=%.3g max|f-F|=%.3g iterations=%zu (%.1fs)", rho, field,
                   df, result.trace.iterations, clock.lap()));
}

}  // namespace

int main() {
  Tally tally;
  Stopwatch total;
  Stopwatch clock;
  const int default_threads = thread_count();

  criterion_trivial(tally);

  // shared runs
  const auto grid = make(kBenchmark);
  const auto data = benchmark_data(grid);
  const auto bench = solve(data, grid, SolverOptions{});
  const auto& sol = bench.solution;
  note(fmt("benchmark solve: %zu iterations in %.1fs", bench.trace.iterations, clock.lap()));

  const auto half_grid = make(kHalf);
  const auto half_data = benchmark_data(half_grid);
  const auto half = solve(half_data, half_grid, SolverOptions{});
  const auto quarter_grid = make(kQuarter);
  const auto quarter_data = benchmark_data(quarter_grid);
  const auto quarter = solve(quarter_data, quarter_grid, SolverOptions{});
  note(fmt("half and quarter resolution solves in %.1fs", clock.lap()));

  const auto short_grid = make(Level{kBenchmark.nx, kBenchmark.nv, 26}, 0.25);
  const auto short_data = benchmark_data(short_grid);
  const auto short_run = solve(short_data, short_grid, SolverOptions{});
  note(fmt("T = 0.25 solve in %.1fs", clock.lap()));

  // 2: contraction
  {
    const auto& d = bench.trace.distances;
    bool decreasing = true;
    for (std::size_t k = 1; k < d.size(); ++k) decreasing = decreasing && d[k] < d[k - 1];
    const auto& r = bench.trace.ratios;
    bool ratios_decreasing = true;
    for (std::size_t k = 1; k < r.size(); ++k) ratios_decreasing = ratios_decreasing && r[k] < r[k - 1];
    const double full_rate = bench.trace.fit.rate;
    const double short_rate = short_run.trace.fit.rate;
    const double quotient = short_rate / full_rate;
    const bool halved = bench.trace.fit.valid && short_run.trace.fit.valid && quotient <= 0.5 * 1.3;
    std::string dk;
    for (double x : d) dk += fmt(" %.3e", x);
    const bool pass = decreasing && ratios_decreasing && bench.trace.converged && bench.trace.iterations <= 25 &&
                      halved;
    tally.report(2, pass,
                 fmt("contraction d_k =%s; iterations=%zu; fitted rate T=0.5: %.4g, T=0.25: %.4g (quotient %.3f, "
                     "limit 0.65)",
                     dk.c_str(), bench.trace.iterations, full_rate, short_rate, quotient));
  }

  // 3: velocity drift
  {
    Lemma1Options options;
    options.samples = 10000;
    const auto report = check_lemma1(sol, options);
    tally.report(3, report.pass,
                 fmt("velocity bounds on %zu trajectories: violations=%g C1_meas=%.5g eps=%.3g worst=%.3g (%.1fs)",
                     report.samples, report.constants.at("violations"), report.constants.at("C1_meas"),
                     report.constants.at("eps_int"), report.worst_violation, clock.lap()));
  }

  // 4: decay preservation
  {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t m = 0; m < grid.nt(); ++m) {
      const double q = decay_fit(sol.density[m].profile(), grid.x());
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    tally.report(4, lo >= 1.8 && hi <= 2.4,
                 fmt("density decay exponent over %zu output times in [%.4f, %.4f], required [1.8, 2.4]", grid.nt(),
                     lo, hi));
  }

  // 5: velocity support
  {
    const auto curve = support_curve(sol, data.background());
    const double c1 = field_impulse(sol.fields);
    const double bound = 2.0 * std::max(curve.raw.front(), c1) + grid.v().spacing();
    const double q = *std::max_element(curve.raw.begin(), curve.raw.end());
    tally.report(5, q <= bound,
                 fmt("support max Q_meas=%.4g, Q_meas(0)=%.4g, C1_meas=%.4g, bound=%.4g", q, curve.raw.front(), c1,
                     bound));
  }

  // 6: Duhamel residual
  {
    const double fine = duhamel_density_residual(sol);
    const double coarse = duhamel_density_residual(half.solution);
    tally.report(6, fine <= 5e-4 && coarse / fine >= 3.0,
                 fmt("Duhamel residual %.3e at the benchmark, %.3e at half resolution (factor %.2f, need >= 3)", fine,
                     coarse, coarse / fine));
  }

  // 7: oracle agreement
  {
    const double g4 = max_abs_diff(quarter.solution.f, splitting_solve(quarter_data, OracleConfig{quarter_grid}).solution.f);
    const double g2 = max_abs_diff(half.solution.f, splitting_solve(half_data, OracleConfig{half_grid}).solution.f);
    const double g1 = max_abs_diff(sol.f, splitting_solve(data, OracleConfig{grid}).solution.f);
    const double o1 = std::log2(g4 / g2);
    const double o2 = std::log2(g2 / g1);
    tally.report(7, o1 >= 1.8 && o2 >= 1.8 && g1 <= kTolCross,
                 fmt("oracle gap %.3e / %.3e / %.3e, orders %.2f, %.2f (need >= 1.8), finest <= tol_cross %.1e (%.1fs)",
                     g4, g2, g1, o1, o2, kTolCross, clock.lap()));
  }

  // 8: field consistency
  {
    bool consistent = true;
    const double fine = field_fd_error(sol, consistent);
    const double coarse = field_fd_error(half.solution, consistent);
    const double order = std::log2(coarse / fine);
    const double integral = weight_integral(2.0, -std::numeric_limits<double>::infinity(),
                                            std::numeric_limits<double>::infinity());
    double worst_ratio = 0.0;
    for (std::size_t m = 0; m < grid.nt(); ++m) {
      worst_ratio = std::max(worst_ratio, sol.field_at(m).sup_abs() / (sol.density[m].weighted_norm * integral));
    }
    tally.report(8, consistent && order >= 1.8 && worst_ratio <= 1.05,
                 fmt("D_x E - rho: %.3e -> %.3e (order %.2f), exact discrete match=%s; max|E| / (||rho||_p int R^-p) "
                     "= %.4f (limit 1.05)",
                     coarse, fine, order, consistent ? "yes" : "no", worst_ratio));
  }

  // 9: weighted integral experiments
  {
    const auto probes = uniform_probes(grid.x().half_width(), 41);
    SyntheticFieldSpec spec;
    spec.bound = 1.0;
    spec.exponent = 2.0;
    spec.bump_radius = 1.0;
    spec.verify();
    const auto l2 = check_lemma2(spec, sol.fields, probes, 0.0, grid.t().end());
    SyntheticFieldSpec doubled = spec;
    doubled.bound = 2.0;
    const auto l2b = check_lemma2(doubled, sol.fields, probes, 0.0, grid.t().end());
    double linearity = 0.0;
    for (std::size_t q = 0; q < probes.size(); ++q) {
      const double a = l2.probes[q].value;
      const double b = l2b.probes[q].value;
      if (a > 0.0) linearity = std::max(linearity, std::abs(b - 2.0 * a) / (2.0 * a));
    }
    const auto start = initial_iterate(data, grid, TailMode::PowerLaw);
    const auto l4 = check_lemma4(sol, start, data.background(), (grid.nt() - 1) / 2, grid.nt() - 1, probes);
    const double s2 = l2.report.constants.at("outer_slope");
    const double s4 = l4.report.constants.at("outer_slope");
    tally.report(9, s2 <= 0.1 && s4 <= 0.1 && linearity <= 1e-10,
                 fmt("outer growth slopes %.4f (field bound) and %.4f (field difference), limit 0.1; linearity in B "
                     "%.2e (limit 1e-10) (%.1fs)",
                     s2, s4, linearity, clock.lap()));
  }

  // 10: extension
  {
    const auto two_step = extend(short_run.solution, short_data, 0.25, 1e6, SolverOptions{});
    const double gap = max_abs_diff(two_step.solution.f, sol.f);
    const double self_convergence = common_node_gap(sol, half.solution);
    bool refused = false;
    try {
      extend(short_run.solution, short_data, 0.25, 0.0, SolverOptions{});
    } catch (const ContinuationRefused&) {
      refused = true;
    }
    tally.report(10, gap <= 5.0 * self_convergence && refused,
                 fmt("two-step vs one-shot max|df|=%.3e, one-shot self-convergence %.3e (limit x5); "
                     "norm_cap=0 refused=%s (%.1fs)",
                     gap, self_convergence, refused ? "yes" : "no", clock.lap()));
  }

  // 11: determinism across thread counts
  {
    const fs::path root = fs::temp_directory_path() / "vp1d_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path config = root / "benchmark.json";
    std::ofstream(config) << nlohmann::json{{"out", (root / "unused").string()}}.dump();
    bool identical = true;
    std::size_t files = 0;
    std::string codes;
    for (int threads : {1, 4, 16}) {
      std::ostringstream log;
      const int code = cli::cmd_run(cli::CommandOptions{config, root / std::to_string(threads), threads}, log);
      codes += fmt(" %d", code);
      if (code != cli::kOk) identical = false;
    }
    for (const auto& entry : fs::recursive_directory_iterator(root / "1")) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), root / "1");
      const std::string reference = slurp(entry.path());
      for (const char* other : {"4", "16"}) {
        if (!fs::exists(root / other / rel) || slurp(root / other / rel) != reference) identical = false;
      }
      ++files;
    }
    set_thread_count(default_threads);
    tally.report(11, identical && files > 0,
                 fmt("%zu output files byte-identical across --threads 1/4/16 (exit codes%s) (%.1fs)", files,
                     codes.c_str(), clock.lap()));
    fs::remove_all(root);
  }

  std::printf("%d of 11 criteria failed; total %.1fs\n", tally.failed, total.lap());
  return tally.failed;
}
