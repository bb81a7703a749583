#include "vp1d/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace vp1d {

namespace {

struct Lagrange4 {
  std::ptrdiff_t first;
  double w[4];
};

// Stencil for evaluating at fractional node position s (node units).
Lagrange4 stencil_at(double s) {
  const double cell = std::floor(s);
  const double u = s - cell;
  Lagrange4 st;
  st.first = static_cast<std::ptrdiff_t>(cell) - 1;
  st.w[0] = -u * (u - 1.0) * (u - 2.0) / 6.0;
  st.w[1] = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
  st.w[2] = -(u + 1.0) * u * (u - 2.0) / 2.0;
  st.w[3] = (u + 1.0) * u * (u - 1.0) / 6.0;
  return st;
}

// g(x, v) <- g(x - shift(v), v) on every v column. Ghost nodes outside the
// box repeat the edge value: near the edge g is dominated by the field-driven
// part -F'(v) int E ds, which is nearly uniform in x, so a decaying closure
// would bias every inflow step. Zero tails keep g = 0 outside.
void advect_x(std::vector<double>& g, const PhaseGrid& grid, double tau, TailMode tail, Execution execution) {
  const std::size_t nx = grid.nx();
  const std::size_t nv = grid.nv();
  const double dx = grid.x().spacing();
  std::vector<double> out(g.size());
  for_each_index(execution, nv, [&](std::size_t i) {
    const double shift = grid.v()[i] * tau;
    auto value = [&](std::ptrdiff_t jj) {
      if (jj >= 0 && jj < static_cast<std::ptrdiff_t>(nx)) return g[static_cast<std::size_t>(jj) * nv + i];
      if (tail == TailMode::Zero) return 0.0;
      return jj < 0 ? g[i] : g[(nx - 1) * nv + i];
    };
    for (std::size_t j = 0; j < nx; ++j) {
      const auto st = stencil_at(static_cast<double>(j) - shift / dx);
      double sum = 0.0;
      for (int q = 0; q < 4; ++q) sum += st.w[q] * value(st.first + q);
      out[j * nv + i] = sum;
    }
  });
  g.swap(out);
}

// f(x, v) <- f(x, v + E(x) dt); f vanishes beyond the velocity box.
void advect_v(std::vector<double>& f, const PhaseGrid& grid, const std::vector<double>& E, double dt,
              Execution execution) {
  const std::size_t nx = grid.nx();
  const std::size_t nv = grid.nv();
  const double dv = grid.v().spacing();
  std::vector<double> out(f.size());
  for_each_index(execution, nx, [&](std::size_t j) {
    const double* row = f.data() + j * nv;
    auto value = [&](std::ptrdiff_t ii) {
      return ii >= 0 && ii < static_cast<std::ptrdiff_t>(nv) ? row[ii] : 0.0;
    };
    const double shift = E[j] * dt / dv;
    for (std::size_t i = 0; i < nv; ++i) {
      const auto st = stencil_at(static_cast<double>(i) + shift);
      double sum = 0.0;
      for (int q = 0; q < 4; ++q) sum += st.w[q] * value(st.first + q);
      out[j * nv + i] = sum;
    }
  });
  f.swap(out);
}

}  // namespace

OracleResult splitting_solve(const InitialData& data, const OracleConfig& config) {
  const PhaseGrid& grid = config.grid;
  const std::size_t nx = grid.nx();
  const std::size_t nv = grid.nv();
  const std::size_t slice = grid.slice_size();
  const double dt = grid.t().step();
  const double p = data.exponent();
  const BackgroundProfile& background = data.background();

  std::vector<double> background_row(nv);
  for (std::size_t i = 0; i < nv; ++i) background_row[i] = background.value(grid.v()[i]);
  auto to_g = [&](std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = background_row[k % nv] - values[k];
  };

  OracleResult result;
  result.cfl_warning = grid.v().half_width() * dt > grid.x().spacing();
  SolutionHistory& sol = result.solution;
  sol.grid = grid;
  sol.origin = "oracle";
  sol.f.resize(grid.nt() * slice);

  std::vector<double> f = data.sample_f0(grid);
  std::copy(f.begin(), f.end(), sol.f.begin());
  const DensityIntegrator integrate(grid, background, p);
  std::vector<double> zero_field(nx, 0.0);

  for (std::size_t n = 1; n < grid.nt(); ++n) {
    to_g(f);
    advect_x(f, grid, 0.5 * dt, config.tail, config.execution);
    to_g(f);
    if (config.zero_field) {
      advect_v(f, grid, zero_field, dt, config.execution);
    } else {
      const auto rho = integrate(PhaseView{f, nx, nv}, grid.t()[n - 1] + 0.5 * dt);
      const auto field = field_from_density(rho, grid.x(), config.tail);
      advect_v(f, grid, field.E, dt, config.execution);
    }
    to_g(f);
    advect_x(f, grid, 0.5 * dt, config.tail, config.execution);
    to_g(f);
    std::copy(f.begin(), f.end(), sol.f.begin() + static_cast<std::ptrdiff_t>(n * slice));
  }

  sol.density.resize(grid.nt());
  for (std::size_t m = 0; m < grid.nt(); ++m) sol.density[m] = integrate(sol.slice(m), grid.t()[m]);
  sol.fields = FieldTimeline(std::make_shared<const FieldHistory>(
      build_field_history(sol.density, grid.x(), grid.t(), config.tail)));

  const auto& report = data.report();
  for (double value : sol.f) {
    result.overshoot = std::max({result.overshoot, report.min_f0 - value, value - report.max_f0});
  }
  return result;
}

}  // namespace vp1d
