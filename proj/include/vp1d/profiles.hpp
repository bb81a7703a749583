#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vp1d/grid.hpp"

namespace vp1d {

/// Fixed ion background F(v) = A_F (W^2 - v^2)^4 / W^8 on |v| <= W, zero
/// outside. The quartic power is the lowest that makes F three times
/// continuously differentiable across the support edge.
class BackgroundProfile {
 public:
  BackgroundProfile() = default;

  double support_radius() const noexcept { return support_; }
  double amplitude() const noexcept { return amplitude_; }
  std::string family() const { return "quartic-bump"; }

  double value(double v) const noexcept;
  double d1(double v) const noexcept;
  double d2(double v) const noexcept;
  double d3(double v) const noexcept;

  /// Largest jump of the one-sided third difference across +-W, measured with
  /// a step of 1e-8 W. make_background requires it to stay below
  /// 1e-4 A_F / W^3.
  double edge_third_difference_jump() const;

  friend BackgroundProfile make_background(double support_radius, double amplitude);

 private:
  double support_ = 1.0;
  double amplitude_ = 1.0;
  double inv_w8_ = 1.0;
};

/// Throws InvalidParameter unless both arguments are positive and finite.
BackgroundProfile make_background(double support_radius, double amplitude);

/// Unit-amplitude perturbation shape; g0 = A_g * value(x, v).
struct PerturbationShape {
  std::string tag;
  std::function<double(double, double)> value;
  std::function<double(double, double)> dv;
  /// Exact v-support radius when known analytically; otherwise it is
  /// measured on the grid.
  std::optional<double> support;
};

/// Builtin shapes:
///  - "separable-bump": R^{-p}(x) (W^2 - v^2)^4 / W^8, v-support W
///  - "narrow-bump":    same with the bump radius W/2
PerturbationShape builtin_shape(const std::string& tag, double support_radius, double p);

struct ValidationReport {
  double min_f0 = 0.0;
  double max_f0 = 0.0;
  /// max over nodes of (|g0| + |d_v g0|) R^p
  double decay_constant = 0.0;
  double triple_norm = 0.0;
  double support = 0.0;  ///< P_V
};

/// f0 = F - g0 together with the data needed to evaluate it off-grid.
class InitialData {
 public:
  const BackgroundProfile& background() const noexcept { return background_; }
  const PerturbationShape& shape() const noexcept { return shape_; }
  double amplitude() const noexcept { return amplitude_; }
  double exponent() const noexcept { return exponent_; }
  double support() const noexcept { return report_.support; }
  const ValidationReport& report() const noexcept { return report_; }

  double g0(double x, double v) const { return amplitude_ == 0.0 ? 0.0 : amplitude_ * shape_.value(x, v); }
  double dv_g0(double x, double v) const { return amplitude_ == 0.0 ? 0.0 : amplitude_ * shape_.dv(x, v); }
  double f0(double x, double v) const { return background_.value(v) - g0(x, v); }

  /// g0 sampled on the (x, v) plane of the grid, x-major.
  std::vector<double> sample_g0(const PhaseGrid& grid) const;
  std::vector<double> sample_f0(const PhaseGrid& grid) const;

  friend InitialData make_initial_data(const BackgroundProfile&, double, double,
                                       PerturbationShape, const PhaseGrid&);

 private:
  BackgroundProfile background_;
  PerturbationShape shape_;
  double amplitude_ = 0.0;
  double exponent_ = 2.0;
  ValidationReport report_;
};

/// Validates nodewise on `grid`: throws PositivityViolation if f0 < 0 at a
/// node, InvalidParameter if p <= 1, InvalidProfile on non-finite samples.
InitialData make_initial_data(const BackgroundProfile& background, double amplitude, double p,
                              PerturbationShape shape, const PhaseGrid& grid);

InitialData make_initial_data(const BackgroundProfile& background, double amplitude, double p,
                              const std::string& shape_tag, const PhaseGrid& grid);

}  // namespace vp1d
