// Serial reference path vs OpenMP path for the data-parallel kernels.
// Both produce bit-identical results; only wall time differs.

#include <benchmark/benchmark.h>

#include "vp1d/field.hpp"
#include "vp1d/oracle.hpp"
#include "vp1d/parallel.hpp"
#include "vp1d/picard.hpp"

namespace {

using namespace vp1d;

PhaseGrid bench_grid() { return PhaseGrid(PhaseGridParams{20.0, 201, 4.0, 65, 0.5, 26}); }

InitialData bench_data(const PhaseGrid& grid) {
  return make_initial_data(make_background(1.0, 1.0), 0.05, 2.0, "separable-bump", grid);
}

Execution policy(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void BM_ApplyMap(benchmark::State& state) {
  const auto grid = bench_grid();
  const auto data = bench_data(grid);
  const auto start = initial_iterate(data, grid, TailMode::PowerLaw);
  SolverOptions options;
  options.execution = policy(state);
  for (auto _ : state) {
    auto next = apply_map(start, data, options);
    benchmark::DoNotOptimize(next.f.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.nt() * grid.slice_size()));
  state.SetLabel(to_string(options.execution) + ", " + std::to_string(thread_count()) + " threads");
}

void BM_Oracle(benchmark::State& state) {
  const auto grid = bench_grid();
  const auto data = bench_data(grid);
  OracleConfig config{grid};
  config.execution = policy(state);
  for (auto _ : state) {
    auto out = splitting_solve(data, config);
    benchmark::DoNotOptimize(out.solution.f.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.nt() * grid.slice_size()));
  state.SetLabel(to_string(config.execution) + ", " + std::to_string(thread_count()) + " threads");
}

void BM_DensityAndField(benchmark::State& state) {
  const auto grid = PhaseGrid(PhaseGridParams{20.0, 401, 4.0, 129, 0.5, 2});
  const auto data = bench_data(grid);
  const auto f0 = data.sample_f0(grid);
  const DensityIntegrator integrate(grid, data.background(), 2.0);
  for (auto _ : state) {
    const auto rho = integrate(PhaseView{f0, grid.nx(), grid.nv()}, 0.0);
    auto field = field_from_density(rho, grid.x(), TailMode::PowerLaw);
    benchmark::DoNotOptimize(field.E.data());
  }
}

}  // namespace

BENCHMARK(BM_ApplyMap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Oracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DensityAndField)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
