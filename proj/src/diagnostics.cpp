#include "vp1d/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vp1d/errors.hpp"
#include "vp1d/parallel.hpp"

namespace vp1d {

double field_impulse(const FieldTimeline& timeline) {
  double running = 0.0;
  double best = 0.0;
  bool has_prev = false;
  double prev_t = 0.0;
  double prev_sup = 0.0;
  for (const auto& seg : timeline.segments()) {
    for (std::size_t m = 0; m < seg->t().size(); ++m) {
      const double t = seg->t()[m];
      const double sup = seg->snapshot(m).sup_abs();
      if (has_prev) running += 0.5 * (t - prev_t) * (sup + prev_sup);
      best = std::max(best, running);
      has_prev = true;
      prev_t = t;
      prev_sup = sup;
    }
  }
  return best;
}

double field_impulse(const FieldHistory& history) {
  return field_impulse(FieldTimeline(std::make_shared<const FieldHistory>(history)));
}

double halton(std::size_t index, unsigned base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

LemmaReport check_lemma1(const SolutionHistory& solution, const Lemma1Options& options) {
  const auto& grid = solution.grid;
  const double horizon = solution.fields.end();
  const double c1 = options.impulse_scale * field_impulse(solution.fields);
  const std::size_t n = options.samples;

  struct Sample {
    double v, coarse, fine;
  };
  std::vector<Sample> samples(n);
  for_each_index(options.execution, n, [&](std::size_t k) {
    const double t = halton(k + 1, 2) * horizon;
    const double s = halton(k + 1, 3) * t;
    const double x = (2.0 * halton(k + 1, 5) - 1.0) * grid.x().half_width();
    const double v = (2.0 * halton(k + 1, 7) - 1.0) * grid.v().half_width();
    const auto coarse = flow_backward_to(t, s, x, v, solution.fields, options.substeps);
    const auto fine = flow_backward_to(t, s, x, v, solution.fields, 2 * options.substeps);
    samples[k] = {v, coarse.v0, fine.v0};
  });

  double self_convergence = 0.0;
  for (const auto& smp : samples) self_convergence = std::max(self_convergence, std::abs(smp.coarse - smp.fine));
  const double eps_int = 10.0 * self_convergence;

  LemmaReport report;
  report.lemma = "lemma1";
  report.samples = n;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  for (const auto& smp : samples) {
    const double av = std::abs(smp.v);
    const double aV = std::abs(smp.coarse);
    // roundoff allowance on top of the integrator estimate
    const double eps = eps_int + 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + av + c1);
    double worst = std::max((av - c1 - eps) - aV, aV - (av + c1 + eps));
    if (av > 2.0 * c1) worst = std::max({worst, (0.5 * av - eps) - aV, aV - (1.5 * av + eps)});
    if (worst > 0.0) ++violations;
    report.worst_violation = std::max(report.worst_violation, worst);
  }
  if (n == 0) report.worst_violation = 0.0;
  report.pass = violations == 0;
  report.constants["C1_meas"] = c1;
  report.constants["eps_int"] = eps_int;
  report.constants["self_convergence"] = self_convergence;
  report.constants["violations"] = static_cast<double>(violations);
  return report;
}

double SyntheticFieldSpec::field(double x) const {
  if (family == "constant") return bound;
  if (family != "arctan") throw InvalidParameter("unknown synthetic field family '" + family + "'");
  const double total = weight_integral(exponent, 0.0, std::numeric_limits<double>::infinity());
  const double scale = std::min(1.0, 1.0 / total);
  return bound * scale * weight_integral(exponent, 0.0, x);
}

double SyntheticFieldSpec::field_derivative(double x) const {
  if (family == "constant") return 0.0;
  const double total = weight_integral(exponent, 0.0, std::numeric_limits<double>::infinity());
  const double scale = std::min(1.0, 1.0 / total);
  return bound * scale / weight_pow(x, exponent);
}

double SyntheticFieldSpec::bump(double v) const {
  if (std::abs(v) >= bump_radius) return 0.0;
  const double u = 1.0 - (v / bump_radius) * (v / bump_radius);
  return u * u * u;
}

double SyntheticFieldSpec::bump_derivative(double v) const {
  if (std::abs(v) >= bump_radius) return 0.0;
  const double u = 1.0 - (v / bump_radius) * (v / bump_radius);
  return -6.0 * v / (bump_radius * bump_radius) * u * u;
}

std::pair<double, double> SyntheticFieldSpec::verify(double half_width, std::size_t nodes) const {
  const SymmetricAxis axis(half_width, nodes);
  double sup = 0.0;
  double sup_derivative = 0.0;
  for (std::size_t k = 0; k < axis.size(); ++k) {
    sup = std::max(sup, std::abs(field(axis[k])) / bound);
    sup_derivative = std::max(sup_derivative, std::abs(field_derivative(axis[k])) * weight_pow(axis[k], exponent) / bound);
  }
  if (sup > 1.01 || sup_derivative > 1.01) {
    throw InvalidParameter("synthetic field violates its bounds");
  }
  return {sup, sup_derivative};
}

double outer_growth_slope(const std::vector<ProbeRow>& rows) {
  if (rows.empty()) return 0.0;
  double x_max = 0.0;
  for (const auto& row : rows) x_max = std::max(x_max, std::abs(row.x));
  std::vector<double> lx, ly;
  for (const auto& row : rows) {
    if (std::abs(row.x) >= 0.5 * x_max && row.weighted > 1e-300) {
      lx.push_back(std::log(weight(row.x)));
      ly.push_back(std::log(row.weighted));
    }
  }
  if (lx.size() < 2) return 0.0;
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

std::vector<double> uniform_probes(double half_width, std::size_t count) {
  if (count < 2) throw InvalidParameter("need at least 2 probes");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = half_width * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  return out;
}

WeightedIntegralReport check_lemma2(const SyntheticFieldSpec& spec, const FieldTimeline& timeline,
                                    const std::vector<double>& probes, double s, double t,
                                    const Lemma2Options& options) {
  if (s > t) throw InvalidParameter("weighted field integral needs s <= t");
  const double reach = spec.bump_radius + field_impulse(timeline);
  const SymmetricAxis vaxis(1.05 * reach + 1e-3, options.v_nodes);
  const auto weights = simpson_weights(vaxis.size(), vaxis.spacing());

  WeightedIntegralReport out;
  out.probes.resize(probes.size());
  for_each_index(Execution::Parallel, probes.size(), [&](std::size_t q) {
    const double x = probes[q];
    double sum = 0.0;
    for (std::size_t i = 0; i < vaxis.size(); ++i) {
      const auto foot = flow_backward_to(t, s, x, vaxis[i], timeline, options.substeps);
      sum += weights[i] * spec.field(foot.x0) * spec.bump_derivative(foot.v0);
    }
    const double value = std::abs(sum);
    out.probes[q] = {x, value, value * weight_pow(x, spec.exponent)};
  });

  double sup = 0.0;
  for (const auto& row : out.probes) sup = std::max(sup, row.weighted);
  const double slope = outer_growth_slope(out.probes);
  auto& report = out.report;
  report.lemma = "lemma2";
  report.samples = probes.size();
  report.constants["fitted_C"] = sup / spec.bound;
  report.constants["sup_weighted"] = sup;
  report.constants["outer_slope"] = slope;
  report.constants["B"] = spec.bound;
  report.worst_violation = slope - options.slope_limit;
  report.pass = slope <= options.slope_limit;
  report.notes = "synthetic field family: " + spec.family;
  return out;
}

namespace {

// Bilinear interpolation on an (x, v) slice; zero outside the v range and
// clamped in x.
double bilinear(const std::vector<double>& values, const PhaseGrid& grid, double x, double v) {
  const double vmax = grid.v().half_width();
  if (std::abs(v) > vmax) return 0.0;
  const double sx = std::clamp((x - grid.x()[0]) / grid.x().spacing(), 0.0, static_cast<double>(grid.nx() - 1));
  const double sv = std::clamp((v - grid.v()[0]) / grid.v().spacing(), 0.0, static_cast<double>(grid.nv() - 1));
  const auto j = std::min(static_cast<std::size_t>(sx), grid.nx() - 2);
  const auto i = std::min(static_cast<std::size_t>(sv), grid.nv() - 2);
  const double a = sx - static_cast<double>(j);
  const double b = sv - static_cast<double>(i);
  const std::size_t nv = grid.nv();
  return (1 - a) * (1 - b) * values[j * nv + i] + a * (1 - b) * values[(j + 1) * nv + i] +
         (1 - a) * b * values[j * nv + i + 1] + a * b * values[(j + 1) * nv + i + 1];
}

enum class Axis { X, V };

// d/dx or d/dv of g = F - f on one slice, 2nd-order differences.
std::vector<double> g_derivative(const SolutionHistory& sol, const BackgroundProfile& background, std::size_t m,
                                 Axis axis) {
  const auto& grid = sol.grid;
  const std::size_t nx = grid.nx();
  const std::size_t nv = grid.nv();
  const auto f = sol.slice(m);
  auto g = [&](std::size_t j, std::size_t i) { return background.value(grid.v()[i]) - f(j, i); };
  std::vector<double> out(nx * nv);
  for (std::size_t j = 0; j < nx; ++j) {
    for (std::size_t i = 0; i < nv; ++i) {
      double d = 0.0;
      if (axis == Axis::V) {
        const double h = grid.v().spacing();
        if (i == 0) d = (-3 * g(j, 0) + 4 * g(j, 1) - g(j, 2)) / (2 * h);
        else if (i + 1 == nv) d = (3 * g(j, nv - 1) - 4 * g(j, nv - 2) + g(j, nv - 3)) / (2 * h);
        else d = (g(j, i + 1) - g(j, i - 1)) / (2 * h);
      } else {
        const double h = grid.x().spacing();
        if (j == 0) d = (-3 * g(0, i) + 4 * g(1, i) - g(2, i)) / (2 * h);
        else if (j + 1 == nx) d = (3 * g(nx - 1, i) - 4 * g(nx - 2, i) + g(nx - 3, i)) / (2 * h);
        else d = (g(j + 1, i) - g(j - 1, i)) / (2 * h);
      }
      out[j * nv + i] = d;
    }
  }
  return out;
}

}  // namespace

WeightedIntegralReport check_lemma4(const SolutionHistory& a, const SolutionHistory& b,
                                    const BackgroundProfile& background, std::size_t s_index,
                                    std::size_t t_index, const std::vector<double>& probes,
                                    const Lemma4Options& options) {
  if (!(a.grid == b.grid)) throw InvalidComparison("field difference integral needs runs on the same grid");
  if (s_index > t_index || t_index >= a.grid.nt()) throw InvalidParameter("field difference integral needs s <= t inside the grid");
  const auto& grid = a.grid;
  const double s = a.time_at(s_index);
  const double t = a.time_at(t_index);
  const double p = a.density[s_index].exponent;

  std::vector<double> rho_diff(grid.nx());
  for (std::size_t j = 0; j < grid.nx(); ++j) rho_diff[j] = a.density[s_index].rho[j] - b.density[s_index].rho[j];
  const double distance = weighted_sup_norm(WeightedProfile{rho_diff, p}, grid.x());

  const auto dvg = g_derivative(b, background, s_index, Axis::V);
  const auto weights = simpson_weights(grid.nv(), grid.v().spacing());

  WeightedIntegralReport out;
  out.probes.resize(probes.size());
  for_each_index(Execution::Parallel, probes.size(), [&](std::size_t q) {
    const double x = probes[q];
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.nv(); ++i) {
      const auto foot = flow_backward_to(t, s, x, grid.v()[i], a.fields, options.substeps);
      const double de = a.fields(s, foot.x0) - b.fields(s, foot.x0);
      sum += weights[i] * de * bilinear(dvg, grid, foot.x0, foot.v0);
    }
    const double value = std::abs(sum);
    const double ratio = distance > 0.0 ? value * weight_pow(x, p) / distance : 0.0;
    out.probes[q] = {x, value, ratio};
  });

  double sup = 0.0;
  for (const auto& row : out.probes) sup = std::max(sup, row.weighted);
  const double slope = outer_growth_slope(out.probes);
  auto& report = out.report;
  report.lemma = "lemma4";
  report.samples = probes.size();
  report.constants["fitted_C"] = sup;
  report.constants["density_distance"] = distance;
  report.constants["outer_slope"] = slope;
  report.constants["s"] = s;
  report.constants["t"] = t;
  report.worst_violation = slope - options.slope_limit;
  report.pass = slope <= options.slope_limit;
  return out;
}

double decay_fit(const WeightedProfile& sigma, const SymmetricAxis& x) {
  if (sigma.values.size() != x.size()) throw InvalidParameter("profile does not match axis");
  const double half = 0.5 * x.half_width();
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double value = std::abs(sigma.values[j]);
    if (std::abs(x[j]) >= half - 1e-12 * x.half_width() && value > 1e-14 && std::isfinite(value)) {
      lx.push_back(-std::log(weight(x[j])));
      ly.push_back(std::log(value));
    }
  }
  if (lx.size() < 3) throw InsufficientData("decay fit needs at least 3 usable outer nodes");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  if (!(sxx > 0.0)) throw InsufficientData("decay fit has no spread in R");
  return sxy / sxx;
}

SupportCurve support_curve(const SolutionHistory& solution, const BackgroundProfile& background) {
  const auto& grid = solution.grid;
  SupportCurve curve;
  double running = 0.0;
  for (std::size_t m = 0; m < grid.nt(); ++m) {
    const auto f = solution.slice(m);
    double q = 0.0;
    for (std::size_t i = 0; i < grid.nv(); ++i) {
      const double v = grid.v()[i];
      if (std::abs(v) <= q) continue;
      const double fv = background.value(v);
      for (std::size_t j = 0; j < grid.nx(); ++j) {
        if (std::abs(fv - f(j, i)) > 1e-12) {
          q = std::abs(v);
          break;
        }
      }
    }
    running = std::max(running, q);
    curve.raw.push_back(q);
    curve.envelope.push_back(running);
    curve.clamped.push_back(std::max(running, background.support_radius()));
  }
  return curve;
}

double duhamel_density_residual(const SolutionHistory& solution) {
  if (solution.duhamel.empty()) throw InsufficientData("no Duhamel residual recorded on this solution");
  const auto& grid = solution.grid;
  const auto weights = simpson_weights(grid.nv(), grid.v().spacing());
  const double p = solution.density.front().exponent;
  double worst = 0.0;
  for (std::size_t m = 0; m < grid.nt(); ++m) {
    for (std::size_t j = 0; j < grid.nx(); ++j) {
      const double* row = solution.duhamel.data() + (m * grid.nx() + j) * grid.nv();
      double sum = 0.0;
      for (std::size_t i = 0; i < grid.nv(); ++i) sum += weights[i] * row[i];
      worst = std::max(worst, std::abs(sum) * weight_pow(grid.x()[j], p));
    }
  }
  return worst;
}

ChargeDrift charge_drift(const SolutionHistory& solution, const BackgroundProfile& background) {
  const auto& grid = solution.grid;
  const auto weights = simpson_weights(grid.nv(), grid.v().spacing());
  auto current = [&](std::size_t m, std::size_t j) {
    const auto f = solution.slice(m);
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.nv(); ++i) {
      const double v = grid.v()[i];
      sum += weights[i] * v * (background.value(v) - f(j, i));
    }
    return -sum;
  };
  ChargeDrift out;
  const auto box_charge = [&](std::size_t m) {
    return trapezoid_prefix(solution.density[m].rho, grid.x().spacing()).back();
  };
  const double q0 = box_charge(0);
  double bound = 0.0;
  double prev_flux = 0.0;
  for (std::size_t m = 0; m < grid.nt(); ++m) {
    const double flux = std::abs(current(m, 0)) + std::abs(current(m, grid.nx() - 1));
    if (m > 0) bound += 0.5 * (solution.time_at(m) - solution.time_at(m - 1)) * (flux + prev_flux);
    prev_flux = flux;
    out.drift.push_back(std::abs(box_charge(m) - q0));
    out.flux_bound.push_back(bound);
  }
  return out;
}

double volume_defect(const SolutionHistory& solution, std::size_t samples, std::size_t substeps) {
  const auto& window = *solution.fields.segments().back();
  const auto& grid = solution.grid;
  std::vector<double> defect(samples, 0.0);
  for_each_index(Execution::Parallel, samples, [&](std::size_t k) {
    const double t = window.t().start() + halton(k + 1, 2) * (window.t().end() - window.t().start());
    const double x = (2.0 * halton(k + 1, 3) - 1.0) * 0.9 * grid.x().half_width();
    const double v = (2.0 * halton(k + 1, 5) - 1.0) * 0.9 * grid.v().half_width();
    defect[k] = std::abs(flow_jacobian(t, x, v, window, substeps) - 1.0);
  });
  double worst = 0.0;
  for (double d : defect) worst = std::max(worst, d);
  return worst;
}

std::vector<double> derivative_monitor(const SolutionHistory& solution, const BackgroundProfile& background,
                                       std::size_t t_index, double x, double v, std::size_t substeps) {
  const auto& grid = solution.grid;
  std::vector<double> out;
  double s = solution.time_at(t_index);
  double px = x;
  double pv = v;
  for (std::size_t m = t_index + 1; m-- > 0;) {
    if (m < t_index) {
      const double target = solution.time_at(m);
      const auto foot = flow_backward_to(s, target, px, pv, solution.fields, substeps);
      px = foot.x0;
      pv = foot.v0;
      s = target;
    }
    const auto dv = g_derivative(solution, background, m, Axis::V);
    const auto dx = g_derivative(solution, background, m, Axis::X);
    out.push_back(std::abs(bilinear(dv, grid, px, pv)) + std::abs(bilinear(dx, grid, px, pv)));
  }
  return out;
}

std::vector<SummaryRow> summarize(const SolutionHistory& solution, const InitialData& data) {
  const auto curve = support_curve(solution, data.background());
  const auto norms = triple_norm_history(solution, data.background(), data.exponent());
  std::vector<SummaryRow> rows;
  for (std::size_t m = 0; m < solution.grid.nt(); ++m) {
    SummaryRow row;
    row.t = solution.time_at(m);
    row.rho_norm = solution.density[m].weighted_norm;
    row.max_abs_E = solution.field_at(m).sup_abs();
    row.support = curve.clamped[m];
    row.triple_norm = norms[m];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace vp1d
