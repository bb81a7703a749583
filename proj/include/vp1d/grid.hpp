#pragma once

// Phase-space/time grids, the decay weight R(x) = sqrt(1 + x^2) and the
// weighted sup norms built on it.
//
// All norms here are sups over grid nodes, not over the real line. They
// converge to the continuous sups only as the grid is refined and the box
// [-L, L] is enlarged; callers that care about truncation should look at
// WeightedNormReport::boundary_value.

#include <cstddef>
#include <span>
#include <vector>

namespace vp1d {

/// Uniform axis on [-half_width, half_width] with an odd node count so that
/// 0 is a node. Node k positions are computed as (k - center) * spacing, which
/// makes the node set exactly symmetric under negation.
class SymmetricAxis {
 public:
  SymmetricAxis() = default;
  SymmetricAxis(double half_width, std::size_t count);

  double half_width() const noexcept { return half_width_; }
  std::size_t size() const noexcept { return count_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t center() const noexcept { return (count_ - 1) / 2; }

  double operator[](std::size_t k) const noexcept {
    return (static_cast<double>(k) - static_cast<double>(center())) * spacing_;
  }
  /// Index of the node mirrored through 0.
  std::size_t mirror(std::size_t k) const noexcept { return count_ - 1 - k; }

  std::vector<double> nodes() const;

  friend bool operator==(const SymmetricAxis&, const SymmetricAxis&) = default;

 private:
  double half_width_ = 0.0;
  std::size_t count_ = 0;
  double spacing_ = 0.0;
};

/// Uniform time axis t_m = start + m * step, m = 0 .. count-1.
class TimeAxis {
 public:
  TimeAxis() = default;
  TimeAxis(double start, double end, std::size_t count);

  double start() const noexcept { return start_; }
  double end() const noexcept { return end_; }
  std::size_t size() const noexcept { return count_; }
  double step() const noexcept { return step_; }
  double operator[](std::size_t m) const noexcept {
    return m + 1 == count_ ? end_ : start_ + static_cast<double>(m) * step_;
  }

  friend bool operator==(const TimeAxis&, const TimeAxis&) = default;

 private:
  double start_ = 0.0;
  double end_ = 0.0;
  std::size_t count_ = 0;
  double step_ = 0.0;
};

struct PhaseGridParams {
  double x_half_width = 20.0;
  std::size_t x_count = 401;
  double v_half_width = 4.0;
  std::size_t v_count = 129;
  double time_horizon = 0.5;
  std::size_t time_count = 51;
};

/// Space-velocity-time grid. Throws InvalidParameter on construction if a
/// count is even or < 3 (time count >= 2) or a width is not positive.
class PhaseGrid {
 public:
  PhaseGrid() = default;
  explicit PhaseGrid(const PhaseGridParams& params);
  PhaseGrid(SymmetricAxis x, SymmetricAxis v, TimeAxis t);

  const SymmetricAxis& x() const noexcept { return x_; }
  const SymmetricAxis& v() const noexcept { return v_; }
  const TimeAxis& t() const noexcept { return t_; }

  std::size_t nx() const noexcept { return x_.size(); }
  std::size_t nv() const noexcept { return v_.size(); }
  std::size_t nt() const noexcept { return t_.size(); }
  std::size_t slice_size() const noexcept { return nx() * nv(); }

  /// Same phase plane, different time axis.
  PhaseGrid with_time(TimeAxis t) const { return PhaseGrid(x_, v_, t); }
  bool same_phase_plane(const PhaseGrid& other) const noexcept {
    return x_ == other.x_ && v_ == other.v_;
  }

  friend bool operator==(const PhaseGrid&, const PhaseGrid&) = default;

 private:
  SymmetricAxis x_;
  SymmetricAxis v_;
  TimeAxis t_;
};

/// Read-only view of one time slice f(x_j, v_i), stored x-major: index j*nv+i.
struct PhaseView {
  std::span<const double> data;
  std::size_t nx = 0;
  std::size_t nv = 0;

  double operator()(std::size_t j, std::size_t i) const noexcept { return data[j * nv + i]; }
  std::span<const double> row(std::size_t j) const noexcept { return data.subspan(j * nv, nv); }
};

double weight(double x) noexcept;
/// R(x)^p
double weight_pow(double x, double p) noexcept;

/// Integral of R^{-p} over [a, b]; closed form for p = 2, adaptive
/// Gauss-Kronrod otherwise. b may be +infinity and a may be -infinity.
double weight_integral(double p, double a, double b);

struct WeightedProfile {
  std::vector<double> values;  ///< one value per x node
  double exponent = 2.0;
};

/// sup_j |sigma(x_j)| R^p(x_j). Throws InvalidProfile on non-finite input and
/// InvalidParameter when the profile size does not match the axis or p <= 1.
double weighted_sup_norm(const WeightedProfile& sigma, const SymmetricAxis& x);

struct WeightedNormReport {
  double norm = 0.0;
  std::size_t argmax = 0;
  /// max of |sigma| R^p over the two end nodes; when this equals norm the sup
  /// is attained at the truncation boundary.
  double boundary_value = 0.0;
};

WeightedNormReport weighted_sup_report(const WeightedProfile& sigma, const SymmetricAxis& x);

/// Composite Simpson weights for n (odd) nodes of spacing h.
std::vector<double> simpson_weights(std::size_t n, double h);
double simpson(std::span<const double> values, double h);

/// Cumulative trapezoid: out[0] = 0, out[k] = integral over [node 0, node k].
std::vector<double> trapezoid_prefix(std::span<const double> values, double h);

struct TripleNormParts {
  double sup = 0.0;           ///< ||h||_inf
  double sup_dv = 0.0;        ///< ||d_v h||_inf
  double weighted_dx = 0.0;   ///< ||d_x h||_p, sup over x and v
  double weighted_density = 0.0;  ///< ||int h dv||_p
  double total() const noexcept { return sup + sup_dv + weighted_dx + weighted_density; }
};

/// Four-term triple norm with 2nd-order differences (one-sided at the edges)
/// and Simpson in v.
TripleNormParts triple_norm_parts(PhaseView h, const PhaseGrid& grid, double p);
double triple_norm(PhaseView h, const PhaseGrid& grid, double p);

}  // namespace vp1d
