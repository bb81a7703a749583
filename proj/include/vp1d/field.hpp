#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vp1d/grid.hpp"
#include "vp1d/profiles.hpp"

namespace vp1d {

/// Closure of the density outside [-L, L].
///  - PowerLaw: rho(y) = rho(+-L) (R(L)/R(y))^p beyond the box
///  - Zero:     rho(y) = 0 beyond the box
enum class TailMode { PowerLaw, Zero };

std::string to_string(TailMode mode);
TailMode tail_mode_from_string(const std::string& name);

struct DensitySnapshot {
  std::vector<double> rho;  ///< one value per x node
  double time = 0.0;
  double exponent = 2.0;
  double weighted_norm = 0.0;  ///< ||rho||_p, equals weighted_sup_norm(rho, p)

  WeightedProfile profile() const { return {rho, exponent}; }
};

/// rho(x_j) = Simpson over v of (F(v_i) - f(x_j, v_i)).
DensitySnapshot charge_density(PhaseView f, const PhaseGrid& grid, const BackgroundProfile& background,
                               double time, double p);

/// Reusable form of charge_density: caches the Simpson weights and the
/// sampled background so the per-slice cost is one fused multiply-add per node.
class DensityIntegrator {
 public:
  DensityIntegrator(const PhaseGrid& grid, const BackgroundProfile& background, double p);
  DensitySnapshot operator()(PhaseView f, double time) const;
  /// Simpson over v of one row of values.
  double integrate_row(std::span<const double> row) const noexcept;

 private:
  PhaseGrid grid_;
  double exponent_;
  std::vector<double> weights_;
  double background_mass_ = 0.0;  ///< Simpson of F over the v nodes
};

/// Electric field sampled on the x nodes at one instant, plus the far-field
/// data needed to evaluate it outside the box.
struct FieldSnapshot {
  std::vector<double> E;
  double time = 0.0;
  /// rho(-L) R(L)^p and rho(+L) R(L)^p: amplitudes of the power-law tails.
  double tail_minus = 0.0;
  double tail_plus = 0.0;
  double tail_mass_minus = 0.0;  ///< integral of rho over (-inf, -L)
  double tail_mass_plus = 0.0;   ///< integral of rho over (L, inf)
  double total_charge = 0.0;     ///< tails + trapezoid over the box

  /// sup over the real line of |E|: node maximum or the far-field limit.
  double sup_abs() const noexcept;
};

/// E(x_j) = P(x_j) - M/2 with P the running integral from -infinity.
FieldSnapshot field_from_density(const DensitySnapshot& rho, const SymmetricAxis& x, TailMode mode);

/// E(t, x) on a time window: 4-point Lagrange cubic in x, linear in t.
/// Outside [-L, L] the boundary value plus the tail-model increment is used.
class FieldHistory {
 public:
  FieldHistory() = default;
  FieldHistory(SymmetricAxis x, TimeAxis t, std::vector<FieldSnapshot> snapshots, double p, TailMode mode);

  const SymmetricAxis& x() const noexcept { return x_; }
  const TimeAxis& t() const noexcept { return t_; }
  double exponent() const noexcept { return p_; }
  TailMode tail_mode() const noexcept { return mode_; }
  const std::vector<FieldSnapshot>& snapshots() const noexcept { return snapshots_; }
  const FieldSnapshot& snapshot(std::size_t m) const { return snapshots_.at(m); }

  /// Throws OutOfRange if t is outside the window.
  double operator()(double t, double x) const {
    // fast path: inside the box at one of the pre-blended time levels
    const double level = (t - t_.start()) * inv_level_step_;
    if (x >= x_first_ && x <= x_last_ && level >= -1e-8 && level <= max_level_ + 1e-8) {
      const auto nearest = static_cast<std::size_t>(level + 0.5);
      if (std::abs(level - static_cast<double>(nearest)) < 1e-8) {
        double u = (x - x_first_) * inv_dx_;
        const auto node = static_cast<double>(static_cast<std::ptrdiff_t>(u + 0.5));
        if (std::abs(u - node) < 1e-9) u = node;
        auto first = static_cast<std::ptrdiff_t>(u) - 1;
        if (first < 0) first = 0;
        if (first > last_first_) first = last_first_;
        const double r = u - static_cast<double>(first + 1);
        const double* v = staged_.data() + nearest * x_.size() + static_cast<std::size_t>(first);
        return -r * (r - 1.0) * (r - 2.0) / 6.0 * v[0] + (r + 1.0) * (r - 1.0) * (r - 2.0) / 2.0 * v[1] -
               (r + 1.0) * r * (r - 2.0) / 2.0 * v[2] + (r + 1.0) * r * (r - 1.0) / 6.0 * v[3];
      }
    }
    return evaluate(t, x);
  }

  /// Field of one snapshot at an arbitrary position.
  double spatial(std::size_t m, double x) const;

  /// Upper bound on sup over the window and over all x of |E| as the
  /// interpolant can evaluate it: the cubic Lebesgue constant 5/4 times the
  /// largest snapshot sup (far field included).
  double interpolant_bound(std::size_t interval) const;

  /// Time levels per snapshot interval held pre-blended; queries landing on
  /// one of them skip the time interpolation.
  static constexpr std::size_t kStageLevels = 8;

 private:
  double tail_increment(const FieldSnapshot& snap, double x) const;
  double evaluate(double t, double x) const;

  SymmetricAxis x_;
  TimeAxis t_;
  std::vector<FieldSnapshot> snapshots_;
  double p_ = 2.0;
  TailMode mode_ = TailMode::PowerLaw;
  double inv_dx_ = 0.0;
  double x_first_ = 0.0;
  double x_last_ = 0.0;
  std::vector<double> staged_;  ///< ((nt - 1) kStageLevels + 1) rows of nx values
  double inv_level_step_ = 0.0;
  double max_level_ = 0.0;
  std::ptrdiff_t last_first_ = 0;
};

FieldHistory build_field_history(const std::vector<DensitySnapshot>& densities, const SymmetricAxis& x,
                                 const TimeAxis& t, TailMode mode);

/// Convenience: field_history(t, x).
double field_interp(const FieldHistory& history, double t, double x);

struct FieldConsistency {
  double max_error = 0.0;   ///< max over interior nodes of |D_x E - rho|
  double error_constant = 0.0;  ///< max_error / dx^2
  /// Exact discrete value of the error for a trapezoid-prefix field:
  /// max |rho_{j+1} - 2 rho_j + rho_{j-1}| / 4.
  double expected_error = 0.0;
  double box_mass_error = 0.0;  ///< |E(L) - E(-L) - trapezoid of rho|
};

FieldConsistency check_field_density(std::span<const double> E, std::span<const double> rho,
                                     const SymmetricAxis& x);

}  // namespace vp1d
