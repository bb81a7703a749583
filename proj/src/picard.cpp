#include "vp1d/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vp1d/diagnostics.hpp"

namespace vp1d {

namespace {

// Grid index of the first node of each window.
std::vector<std::size_t> window_offsets(const FieldTimeline& timeline) {
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& seg : timeline.segments()) {
    offsets.push_back(offset);
    offset += seg->t().size() - 1;
  }
  return offsets;
}

// Trapezoid in s of E(s, X) F'(V) over the samples taken at snapshot times.
class DuhamelAccumulator {
 public:
  DuhamelAccumulator(const BackgroundProfile& background, std::size_t substeps)
      : background_(background), substeps_(substeps) {}

  void operator()(const FieldHistory& field, std::size_t step, double s, double x, double v) {
    if (step % substeps_ != 0) return;
    const double e = field(s, x) * background_.d1(v);
    if (has_prev_) integral_ += 0.5 * (prev_s_ - s) * (prev_e_ + e);
    has_prev_ = true;
    prev_s_ = s;
    prev_e_ = e;
  }
  double integral() const noexcept { return integral_; }

 private:
  const BackgroundProfile& background_;
  std::size_t substeps_;
  bool has_prev_ = false;
  double prev_s_ = 0.0;
  double prev_e_ = 0.0;
  double integral_ = 0.0;
};

std::vector<double> difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

std::vector<double> g_slice(const SolutionHistory& sol, const BackgroundProfile& background, std::size_t m) {
  const auto& grid = sol.grid;
  std::vector<double> g(grid.slice_size());
  const auto f = sol.slice(m);
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    for (std::size_t i = 0; i < grid.nv(); ++i) g[j * grid.nv() + i] = background.value(grid.v()[i]) - f(j, i);
  }
  return g;
}

}  // namespace

std::size_t SolutionHistory::active_start() const {
  if (fields.empty()) throw InvalidParameter("solution history has no field");
  return grid.nt() - fields.segments().back()->t().size();
}

const FieldSnapshot& SolutionHistory::field_at(std::size_t m) const {
  const auto offsets = window_offsets(fields);
  for (std::size_t k = offsets.size(); k-- > 0;) {
    if (m >= offsets[k]) return fields.segments()[k]->snapshot(m - offsets[k]);
  }
  throw OutOfRange("time index outside the field timeline");
}

double SolutionHistory::time_at(std::size_t m) const {
  const auto offsets = window_offsets(fields);
  for (std::size_t k = offsets.size(); k-- > 0;) {
    if (m >= offsets[k]) return fields.segments()[k]->t()[m - offsets[k]];
  }
  throw OutOfRange("time index outside the field timeline");
}

ContractionFit fit_contraction(const std::vector<double>& distances, double segment_length) {
  std::vector<double> ks;
  std::vector<double> ys;
  for (std::size_t k = 0; k < distances.size(); ++k) {
    if (distances[k] > 0.0 && std::isfinite(distances[k])) {
      ks.push_back(static_cast<double>(k));
      ys.push_back(std::log(distances[k]) + std::lgamma(static_cast<double>(k) + 1.0));
    }
  }
  ContractionFit fit;
  if (ks.size() < 2) return fit;
  const double n = static_cast<double>(ks.size());
  double mk = 0.0, my = 0.0;
  for (std::size_t q = 0; q < ks.size(); ++q) {
    mk += ks[q];
    my += ys[q];
  }
  mk /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t q = 0; q < ks.size(); ++q) {
    sxy += (ks[q] - mk) * (ys[q] - my);
    sxx += (ks[q] - mk) * (ks[q] - mk);
  }
  const double slope = sxy / sxx;
  fit.valid = true;
  fit.rate = std::exp(slope);
  fit.log_prefactor = my - slope * mk;
  fit.c3 = segment_length > 0.0 ? fit.rate / segment_length : 0.0;
  return fit;
}

SolutionHistory initial_iterate(const InitialData& data, const PhaseGrid& grid, TailMode tail) {
  SolutionHistory out;
  out.grid = grid;
  out.origin = "iterate 0";
  const auto f0 = data.sample_f0(grid);
  out.f.resize(grid.nt() * grid.slice_size());
  for (std::size_t m = 0; m < grid.nt(); ++m) std::copy(f0.begin(), f0.end(), out.f.begin() + m * f0.size());
  const DensityIntegrator integrate(grid, data.background(), data.exponent());
  const auto rho0 = integrate(PhaseView{f0, grid.nx(), grid.nv()}, grid.t()[0]);
  out.density.assign(grid.nt(), rho0);
  for (std::size_t m = 0; m < grid.nt(); ++m) out.density[m].time = grid.t()[m];
  out.fields = FieldTimeline(std::make_shared<const FieldHistory>(
      build_field_history(out.density, grid.x(), grid.t(), tail)));
  return out;
}

SolutionHistory apply_map(const SolutionHistory& iterate, const InitialData& data, const SolverOptions& options) {
  const PhaseGrid& grid = iterate.grid;
  const std::size_t nx = grid.nx();
  const std::size_t nv = grid.nv();
  const std::size_t m0 = iterate.active_start();
  const FieldHistory& window = *iterate.fields.segments().back();
  const BackgroundProfile& background = data.background();

  SolutionHistory out;
  out.grid = grid;
  out.f.resize(iterate.f.size());
  out.density.resize(grid.nt());
  std::copy_n(iterate.f.begin(), m0 * grid.slice_size(), out.f.begin());
  std::copy_n(iterate.density.begin(), m0, out.density.begin());
  if (options.record_duhamel) {
    out.duhamel.assign(iterate.f.size(), 0.0);
    if (!iterate.duhamel.empty()) {
      std::copy_n(iterate.duhamel.begin(), m0 * grid.slice_size(), out.duhamel.begin());
    }
  }

  // Nodes whose velocity cannot drift back into the support of f0 carry
  // f~ = 0 and a zero Duhamel residual exactly; they are not integrated.
  double reach = std::numeric_limits<double>::infinity();
  if (data.shape().support || data.amplitude() == 0.0) {
    const double support = std::max(background.support_radius(), data.amplitude() == 0.0 ? 0.0 : *data.shape().support);
    reach = support + velocity_drift_bound(iterate.fields) * (1.0 + 1e-12) + 1e-12;
  }

  const std::size_t rows = (grid.nt() - m0) * nx;
  std::vector<unsigned char> left(rows, 0);
  for_each_index(options.execution, rows, [&](std::size_t r) {
    const std::size_t m = m0 + r / nx;
    const std::size_t j = r % nx;
    const double t = window.t()[m - m0];
    const double x = grid.x()[j];
    const std::size_t base = (m * nx + j) * nv;
    for (std::size_t i = 0; i < nv; ++i) {
      const double v = grid.v()[i];
      if (std::abs(v) > reach) continue;
      CharEndpoint foot;
      double value = 0.0;
      if (options.record_duhamel) {
        DuhamelAccumulator duhamel(background, options.substeps);
        foot = integrate_backward(iterate.fields, t, 0.0, x, v, options.substeps, duhamel);
        value = data.f0(foot.x0, foot.v0);
        out.duhamel[base + i] =
            (background.value(v) - value) - data.g0(foot.x0, foot.v0) + duhamel.integral();
      } else {
        foot = integrate_backward(iterate.fields, t, 0.0, x, v, options.substeps, detail::NoObserver{});
        value = data.f0(foot.x0, foot.v0);
      }
      out.f[base + i] = value;
      if (foot.left_box) left[r] = 1;
    }
  });
  for (unsigned char flag : left) out.paths_left_box += flag;

  const DensityIntegrator integrate(grid, background, data.exponent());
  for_each_index(options.execution, grid.nt() - m0, [&](std::size_t q) {
    const std::size_t m = m0 + q;
    out.density[m] = integrate(out.slice(m), grid.t()[m]);
  });

  std::vector<DensitySnapshot> active(out.density.begin() + static_cast<std::ptrdiff_t>(m0), out.density.end());
  out.fields = iterate.fields.without_last();
  out.fields.append(std::make_shared<const FieldHistory>(
      build_field_history(active, grid.x(), window.t(), window.tail_mode())));
  return out;
}

double density_distance(const SolutionHistory& a, const SolutionHistory& b, std::size_t from) {
  if (!(a.grid == b.grid)) throw InvalidComparison("density distance between different grids");
  double sup = 0.0;
  for (std::size_t m = from; m < a.grid.nt(); ++m) {
    const WeightedProfile diff{difference(a.density[m].rho, b.density[m].rho), a.density[m].exponent};
    sup = std::max(sup, weighted_sup_norm(diff, a.grid.x()));
  }
  return sup;
}

std::vector<double> triple_norm_history(const SolutionHistory& solution, const BackgroundProfile& background,
                                        double p) {
  std::vector<double> out(solution.grid.nt());
  for (std::size_t m = 0; m < solution.grid.nt(); ++m) {
    const auto g = g_slice(solution, background, m);
    out[m] = triple_norm(PhaseView{g, solution.grid.nx(), solution.grid.nv()}, solution.grid, p);
  }
  return out;
}

namespace {

SolveResult run_picard(SolutionHistory start, const InitialData& data, const SolverOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidParameter("tolerance must be positive");
  if (options.max_iters == 0) throw InvalidParameter("max_iters must be >= 1");
  if (options.substeps == 0) throw InvalidParameter("substeps must be >= 1");

  SolveResult result;
  IterationTrace& trace = result.trace;
  const std::size_t m0 = start.active_start();
  const auto& window = *start.fields.segments().back();
  trace.segment_start = window.t().start();
  trace.segment_length = window.t().end() - window.t().start();

  SolutionHistory current = std::move(start);
  if (options.keep_iterates) result.iterates.push_back(current);
  for (std::size_t k = 0; k < options.max_iters; ++k) {
    SolutionHistory next = apply_map(current, data, options);
    const double d = density_distance(next, current, m0);
    trace.distances.push_back(d);
    if (trace.distances.size() > 1) {
      const double prev = trace.distances[trace.distances.size() - 2];
      trace.ratios.push_back(prev > 0.0 ? d / prev : 0.0);
    }
    trace.field_impulse.push_back(field_impulse(next.fields));
    trace.triple_norms.push_back(triple_norm_history(next, data.background(), data.exponent()));
    trace.iterations = k + 1;
    trace.paths_left_box = next.paths_left_box;
    next.origin = "iterate " + std::to_string(k + 1);
    if (options.keep_iterates) result.iterates.push_back(next);
    current = std::move(next);
    if (d < options.tol * std::max(1.0, trace.distances.front())) {
      trace.converged = true;
      break;
    }
  }
  trace.fit = fit_contraction(trace.distances, trace.segment_length);
  if (!trace.converged) {
    throw NonConvergence("Picard iteration did not reach tol = " + std::to_string(options.tol) + " in " +
                             std::to_string(options.max_iters) + " iterations (last distance " +
                             std::to_string(trace.distances.back()) + ")",
                         trace, std::make_shared<SolutionHistory>(std::move(current)));
  }
  current.origin = "converged";
  result.solution = std::move(current);
  return result;
}

}  // namespace

SolveResult solve(const InitialData& data, const PhaseGrid& grid, const SolverOptions& options) {
  return run_picard(initial_iterate(data, grid, options.tail), data, options);
}

SolveResult extend(const SolutionHistory& solution, const InitialData& data, double delta, double norm_cap,
                   const SolverOptions& options) {
  const auto norms = triple_norm_history(solution, data.background(), data.exponent());
  const double sup_norm = *std::max_element(norms.begin(), norms.end());
  if (sup_norm > norm_cap) {
    throw ContinuationRefused("triple norm " + std::to_string(sup_norm) + " exceeds the cap " +
                              std::to_string(norm_cap) + " on [0, T]");
  }
  const PhaseGrid& grid = solution.grid;
  const double dt = grid.t().step();
  const double steps = std::round(delta / dt);
  if (!(delta > 0.0) || steps < 1.0 || std::abs(steps * dt - delta) > 1e-9 * std::max(1.0, delta)) {
    throw InvalidParameter("extension length must be a positive multiple of the time step " +
                           std::to_string(dt));
  }
  const auto n_ext = static_cast<std::size_t>(steps);
  const double t_start = solution.fields.end();
  const double t_end = t_start + delta;
  const PhaseGrid full = grid.with_time(TimeAxis(0.0, t_end, grid.nt() + n_ext));
  const TimeAxis window(t_start, t_end, n_ext + 1);

  SolutionHistory start;
  start.grid = full;
  start.origin = "iterate 0";
  const std::size_t slice = grid.slice_size();
  const std::size_t last = grid.nt() - 1;
  start.f.resize(full.nt() * slice);
  std::copy(solution.f.begin(), solution.f.end(), start.f.begin());
  for (std::size_t m = grid.nt(); m < full.nt(); ++m) {
    std::copy_n(solution.f.begin() + static_cast<std::ptrdiff_t>(last * slice), slice,
                start.f.begin() + static_cast<std::ptrdiff_t>(m * slice));
  }
  if (!solution.duhamel.empty()) {
    start.duhamel.assign(full.nt() * slice, 0.0);
    std::copy(solution.duhamel.begin(), solution.duhamel.end(), start.duhamel.begin());
  }
  start.density = solution.density;
  std::vector<DensitySnapshot> frozen(n_ext + 1, solution.density[last]);
  for (std::size_t q = 0; q <= n_ext; ++q) {
    frozen[q].time = window[q];
    if (q > 0) start.density.push_back(frozen[q]);
  }
  start.fields = solution.fields;
  start.fields.append(std::make_shared<const FieldHistory>(
      build_field_history(frozen, grid.x(), window, solution.fields.segments().back()->tail_mode())));

  SolveResult result = run_picard(std::move(start), data, options);
  result.trace.norm_cap = norm_cap;
  const auto& ext_norms = result.trace.triple_norms.back();
  for (std::size_t m = grid.nt(); m < ext_norms.size(); ++m) {
    if (ext_norms[m] > norm_cap) result.trace.within_norm_cap = false;
  }
  return result;
}

}  // namespace vp1d
