#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "vp1d/errors.hpp"
#include "vp1d/parallel.hpp"
#include "vp1d/picard.hpp"

using namespace vp1d;

TEST_SUITE("picard") {

TEST_CASE("zero perturbation converges in one map") {
  const auto grid = testing::small_grid(41, 33, 5);
  const auto data = testing::small_data(grid, 0.0);
  const auto result = solve(data, grid, SolverOptions{});
  CHECK(result.trace.converged);
  CHECK(result.trace.iterations == 1);
  CHECK(result.trace.distances.front() == 0.0);
  const auto f0 = data.sample_f0(grid);
  for (std::size_t m = 0; m < grid.nt(); ++m)
    for (std::size_t k = 0; k < grid.slice_size(); ++k) CHECK(result.solution.f[m * grid.slice_size() + k] == f0[k]);
}

TEST_CASE("initial iterate is frozen in time") {
  const auto grid = testing::small_grid(41, 33, 5);
  const auto data = testing::small_data(grid);
  const auto start = initial_iterate(data, grid, TailMode::PowerLaw);
  CHECK(start.f.size() == grid.nt() * grid.slice_size());
  CHECK(start.f_at(4, 7, 9) == start.f_at(0, 7, 9));
  CHECK(density_distance(start, start) == 0.0);
  CHECK(start.active_start() == 0);
}

TEST_CASE("converged solution satisfies its own characteristics") {
  const auto& run = testing::small_run();
  const auto grid = testing::small_grid();
  const auto data = testing::small_data(grid);
  const auto& sol = run.solution;
  CHECK(run.trace.converged);
  for (std::size_t m : {std::size_t{3}, grid.nt() - 1}) {
    for (std::size_t j : {std::size_t{10}, std::size_t{50}, std::size_t{63}}) {
      for (std::size_t i : {std::size_t{25}, std::size_t{32}, std::size_t{37}}) {
        const auto foot = flow_backward_to(sol.time_at(m), 0.0, grid.x()[j], grid.v()[i], sol.fields);
        CHECK(sol.f_at(m, j, i) == doctest::Approx(data.f0(foot.x0, foot.v0)).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("Picard distances shrink monotonically") {
  const auto& trace = testing::small_run().trace;
  REQUIRE(trace.distances.size() >= 3);
  for (std::size_t k = 1; k < trace.distances.size(); ++k) CHECK(trace.distances[k] < trace.distances[k - 1]);
  for (double r : trace.ratios) CHECK(r < 0.1);
  CHECK(trace.distances.back() < 1e-10 * std::max(1.0, trace.distances.front()));
  CHECK(trace.fit.valid);
  CHECK(trace.fit.rate > 0.0);
  CHECK(trace.field_impulse.size() == trace.iterations);
}

TEST_CASE("one more map changes nothing beyond the tolerance") {
  const auto grid = testing::small_grid();
  const auto data = testing::small_data(grid);
  const auto& sol = testing::small_run().solution;
  const auto next = apply_map(sol, data, SolverOptions{});
  CHECK(density_distance(next, sol) < 2e-10 * std::max(1.0, testing::small_run().trace.distances.front()));
}

TEST_CASE("maximum principle") {
  const auto grid = testing::small_grid();
  const auto data = testing::small_data(grid);
  const auto& sol = testing::small_run().solution;
  for (double f : sol.f) {
    CHECK(f >= data.report().min_f0);
    CHECK(f <= data.report().max_f0);
  }
}

TEST_CASE("serial and parallel maps are bitwise identical") {
  const auto grid = testing::small_grid(61, 33, 6);
  const auto data = testing::small_data(grid, 0.2);
  set_thread_count(4);
  SolverOptions serial;
  serial.execution = Execution::Serial;
  SolverOptions parallel;
  parallel.execution = Execution::Parallel;
  const auto a = solve(data, grid, serial);
  const auto b = solve(data, grid, parallel);
  CHECK(a.solution.f == b.solution.f);
  CHECK(a.solution.duhamel == b.solution.duhamel);
  CHECK(a.trace.distances == b.trace.distances);
  set_thread_count(1);
}

TEST_CASE("non-convergence keeps the last iterate") {
  const auto grid = testing::small_grid(41, 33, 5);
  const auto data = testing::small_data(grid);
  SolverOptions options;
  options.max_iters = 1;
  try {
    solve(data, grid, options);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.trace().iterations == 1);
    CHECK_FALSE(e.trace().converged);
    REQUIRE(e.last_iterate());
    CHECK(e.last_iterate()->f.size() == grid.nt() * grid.slice_size());
  }
  options.max_iters = 0;
  CHECK_THROWS_AS(solve(data, grid, options), InvalidParameter);
  options.max_iters = 5;
  options.tol = 0.0;
  CHECK_THROWS_AS(solve(data, grid, options), InvalidParameter);
}

TEST_CASE("contraction fit recovers synthetic rates") {
  std::vector<double> d;
  const double c4 = 0.02, rate = 0.3;
  for (int k = 0; k < 6; ++k) d.push_back(c4 * std::pow(rate, k) / std::tgamma(k + 1.0));
  const auto fit = fit_contraction(d, 0.5);
  CHECK(fit.valid);
  CHECK(fit.rate == doctest::Approx(rate).epsilon(1e-12));
  CHECK(fit.c3 == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(std::exp(fit.log_prefactor) == doctest::Approx(c4).epsilon(1e-12));
  CHECK_FALSE(fit_contraction({1e-3}, 0.5).valid);
  CHECK_FALSE(fit_contraction({0.0, 0.0}, 0.5).valid);
}

TEST_CASE("extension") {
  const auto grid = testing::small_grid(101, 65, 6, 0.25);
  const auto data = testing::small_data(grid);
  const auto first = solve(data, grid, SolverOptions{});

  CHECK_THROWS_AS(extend(first.solution, data, 0.25, 0.0, SolverOptions{}), ContinuationRefused);
  CHECK_THROWS_AS(extend(first.solution, data, 0.07, 1e6, SolverOptions{}), InvalidParameter);
  CHECK_THROWS_AS(extend(first.solution, data, -0.05, 1e6, SolverOptions{}), InvalidParameter);

  const auto ext = extend(first.solution, data, 0.25, 1e6, SolverOptions{});
  CHECK(ext.trace.converged);
  CHECK(ext.trace.within_norm_cap);
  CHECK(ext.solution.grid.nt() == 11);
  CHECK(ext.solution.fields.segments().size() == 2);
  CHECK(ext.solution.active_start() == 5);
  // the history before T is untouched; the node at T is remapped in the converged field
  const std::size_t slice = grid.slice_size();
  for (std::size_t k = 0; k < 5 * slice; ++k) REQUIRE(ext.solution.f[k] == first.solution.f[k]);
  for (std::size_t k = 5 * slice; k < 6 * slice; ++k) REQUIRE(ext.solution.f[k] == doctest::Approx(first.solution.f[k]).epsilon(1e-9));

  // two steps agree with one solve over [0, 2T] to the discretization of the frozen window
  const auto once = solve(data, testing::small_grid(101, 65, 11, 0.5), SolverOptions{});
  const double gap = density_distance(ext.solution, once.solution);
  CHECK(gap < 1e-3 * once.solution.density.back().weighted_norm + 1e-9);
}

TEST_CASE("extension of the equilibrium stays trivial") {
  const auto grid = testing::small_grid(41, 33, 3, 0.2);
  const auto data = testing::small_data(grid, 0.0);
  const auto first = solve(data, grid, SolverOptions{});
  const auto ext = extend(first.solution, data, 0.1, 1e6, SolverOptions{});
  CHECK(ext.trace.iterations == 1);
  for (const auto& d : ext.solution.density)
    for (double r : d.rho) CHECK(r == 0.0);
}

}
