#pragma once

#include <string>

#include "vp1d/field.hpp"
#include "vp1d/grid.hpp"
#include "vp1d/parallel.hpp"
#include "vp1d/picard.hpp"
#include "vp1d/profiles.hpp"

namespace vp1d {

/// Time-marching cross-check: Strang splitting x(dt/2) - v(dt) - x(dt/2)
/// with 4-point Lagrange interpolation along the advected coordinate. It
/// shares the grid and field code with the Picard solver but none of the
/// characteristic integration.
struct OracleConfig {
  PhaseGrid grid;
  TailMode tail = TailMode::PowerLaw;
  Execution execution = Execution::Parallel;
  /// Diagnostic mode: skip the field so the result is free streaming.
  bool zero_field = false;
};

struct OracleResult {
  SolutionHistory solution;
  /// max|v| dt > dx; semi-Lagrangian steps stay stable, this is informational.
  bool cfl_warning = false;
  /// Largest excursion of f outside [min f0, max f0].
  double overshoot = 0.0;
};

OracleResult splitting_solve(const InitialData& data, const OracleConfig& config);

}  // namespace vp1d
