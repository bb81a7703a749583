#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "vp1d/field.hpp"
#include "vp1d/grid.hpp"
#include "vp1d/picard.hpp"
#include "vp1d/profiles.hpp"

namespace testing {

inline vp1d::PhaseGrid small_grid(std::size_t nx = 101, std::size_t nv = 65, std::size_t nt = 11, double T = 0.5) {
  return vp1d::PhaseGrid(vp1d::PhaseGridParams{20.0, nx, 4.0, nv, T, nt});
}

inline vp1d::InitialData small_data(const vp1d::PhaseGrid& grid, double amplitude = 0.05,
                                    const char* shape = "separable-bump") {
  return vp1d::make_initial_data(vp1d::make_background(1.0, 1.0), amplitude, 2.0, shape, grid);
}

// Converged small-amplitude run shared by several test cases.
inline const vp1d::SolveResult& small_run() {
  static const vp1d::SolveResult result = [] {
    const auto grid = small_grid();
    return vp1d::solve(small_data(grid), grid, vp1d::SolverOptions{});
  }();
  return result;
}

// Field history with every snapshot equal to the given node values and no tails.
inline vp1d::FieldHistory frozen_field(const vp1d::SymmetricAxis& x, const vp1d::TimeAxis& t,
                                       const std::vector<double>& E) {
  std::vector<vp1d::FieldSnapshot> snaps(t.size());
  for (std::size_t m = 0; m < t.size(); ++m) {
    snaps[m].E = E;
    snaps[m].time = t[m];
  }
  return vp1d::FieldHistory(x, t, snaps, 2.0, vp1d::TailMode::Zero);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

}  // namespace testing
