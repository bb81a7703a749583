#pragma once

// Backward characteristics dX/ds = V, dV/ds = -E(s, X) with X(t) = x,
// V(t) = v, integrated by classical RK4 with a fixed step of
// (snapshot interval) / substeps. Step boundaries land on every field
// snapshot time when the start time is itself a snapshot time.

#include <cmath>
#include <cstddef>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "vp1d/errors.hpp"
#include "vp1d/field.hpp"

namespace vp1d {

inline constexpr std::size_t kDefaultSubsteps = 4;

struct CharEndpoint {
  double x0 = 0.0;
  double v0 = 0.0;
  double impulse = 0.0;  ///< integral of |E(s, X(s))| along the path
  bool left_box = false;
};

/// Field histories on consecutive windows [0, T1], [T1, T2], ...; the
/// continuation of a solution adds one window per extension.
class FieldTimeline {
 public:
  FieldTimeline() = default;
  explicit FieldTimeline(std::shared_ptr<const FieldHistory> first) { append(std::move(first)); }

  /// Throws InvalidParameter if the new window does not start where the
  /// previous one ends or the x axis differs.
  void append(std::shared_ptr<const FieldHistory> segment);

  std::span<const std::shared_ptr<const FieldHistory>> segments() const noexcept { return segments_; }
  bool empty() const noexcept { return segments_.empty(); }
  double start() const { return segments_.front()->t().start(); }
  double end() const { return segments_.back()->t().end(); }

  /// Index of the window that a backward flow starting at t integrates in
  /// first: the earliest window whose end is >= t.
  std::size_t segment_index(double t) const;
  double operator()(double t, double x) const { return (*segments_[segment_index(t)])(t, x); }

  /// Timeline without its last window.
  FieldTimeline without_last() const;

 private:
  std::vector<std::shared_ptr<const FieldHistory>> segments_;
};

namespace detail {

struct RK4Result {
  double x, v, impulse_increment;
};

// One RK4 step of size h (negative = backward) for (X, V) under -E.
inline RK4Result rk4_step(const FieldHistory& field, double s, double x, double v, double h) {
  const double e1 = field(s, x);
  const double x2 = x + 0.5 * h * v;
  const double v2 = v - 0.5 * h * e1;
  const double e2 = field(s + 0.5 * h, x2);
  const double x3 = x + 0.5 * h * v2;
  const double v3 = v - 0.5 * h * e2;
  const double e3 = field(s + 0.5 * h, x3);
  const double x4 = x + h * v3;
  const double v4 = v - h * e3;
  const double e4 = field(s + h, x4);
  RK4Result out;
  out.x = x + h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
  out.v = v - h / 6.0 * (e1 + 2.0 * e2 + 2.0 * e3 + e4);
  out.impulse_increment = std::abs(h) / 6.0 * (std::abs(e1) + 2.0 * std::abs(e2) + 2.0 * std::abs(e3) + std::abs(e4));
  return out;
}

inline std::size_t step_count(double span, double nominal) {
  if (!(span > 0.0)) return 0;
  const double ratio = span / nominal;
  const auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  return n == 0 ? 1 : n;
}

struct NoObserver {
  void operator()(const FieldHistory&, std::size_t, double, double, double) const noexcept {}
};

}  // namespace detail

/// Integrates backward from (t, x, v) to s_end inside one window. The
/// observer is called as observe(field, step, s, X, V) for step = 0 (the
/// start point) and after every step.
template <class Observer>
CharEndpoint integrate_backward(const FieldHistory& field, double t, double s_end, double x, double v,
                                std::size_t substeps, Observer&& observe) {
  if (substeps == 0) throw InvalidParameter("substeps must be >= 1");
  const double half_width = field.x().half_width();
  CharEndpoint out{x, v, 0.0, std::abs(x) > half_width};
  const std::size_t n = detail::step_count(t - s_end, field.t().step() / static_cast<double>(substeps));
  observe(field, std::size_t{0}, t, x, v);
  if (n == 0) return out;
  const double h = (t - s_end) / static_cast<double>(n);
  double s = t;
  for (std::size_t k = 1; k <= n; ++k) {
    const auto step = detail::rk4_step(field, s, out.x0, out.v0, -h);
    out.x0 = step.x;
    out.v0 = step.v;
    out.impulse += step.impulse_increment;
    s = k == n ? s_end : t - static_cast<double>(k) * h;
    if (!std::isfinite(out.x0) || !std::isfinite(out.v0)) {
      throw IntegrationFailure("characteristic state became non-finite at s = " + std::to_string(s));
    }
    if (std::abs(out.x0) > half_width) out.left_box = true;
    observe(field, k, s, out.x0, out.v0);
  }
  return out;
}

/// Backward through every window of the timeline down to s_end.
template <class Observer>
CharEndpoint integrate_backward(const FieldTimeline& timeline, double t, double s_end, double x, double v,
                                std::size_t substeps, Observer&& observe) {
  CharEndpoint total{x, v, 0.0, false};
  std::size_t index = timeline.segment_index(t);
  double s = t;
  while (true) {
    const FieldHistory& field = *timeline.segments()[index];
    const double target = std::max(s_end, field.t().start());
    const auto part = integrate_backward(field, s, target, total.x0, total.v0, substeps, observe);
    total.x0 = part.x0;
    total.v0 = part.v0;
    total.impulse += part.impulse;
    total.left_box = total.left_box || part.left_box;
    s = target;
    if (target <= s_end || index == 0) break;
    --index;
  }
  return total;
}

/// Upper bound on |V(0) - v| for any path through the whole timeline: the
/// RK4 velocity update is a positive average of field samples, so each step
/// moves V by at most h times the interpolant bound of its interval.
double velocity_drift_bound(const FieldTimeline& timeline);

/// Backward flow from (t, x, v) to the start of the history window.
CharEndpoint flow_backward(double t, double x, double v, const FieldHistory& history,
                           std::size_t substeps = kDefaultSubsteps);
/// Backward flow from (t, x, v) to s_end <= t.
CharEndpoint flow_backward_to(double t, double s_end, double x, double v, const FieldTimeline& timeline,
                              std::size_t substeps = kDefaultSubsteps);
CharEndpoint flow_backward_to(double t, double s_end, double x, double v, const FieldHistory& history,
                              std::size_t substeps = kDefaultSubsteps);

/// Forward flow from (s, x, v) to t >= s with the same step layout as the
/// backward flow over [s, t].
CharEndpoint flow_forward(double s, double t, double x, double v, const FieldHistory& history,
                          std::size_t substeps = kDefaultSubsteps);

/// Integrates t -> start of window -> t and returns max(|dx|, |dv|).
double flow_roundtrip_error(double t, double x, double v, const FieldHistory& history,
                            std::size_t substeps = kDefaultSubsteps);

/// det d(X0, V0)/d(x, v) of the backward map to the window start, by
/// centered differences of half-width `delta` in x and in v.
double flow_jacobian(double t, double x, double v, const FieldHistory& history,
                     std::size_t substeps = kDefaultSubsteps, double delta = 1e-4);

/// Writes "s,X,V" rows for the backward path, one row per step.
void dump_path_csv(std::ostream& out, double t, double x, double v, const FieldHistory& history,
                   std::size_t substeps = kDefaultSubsteps);

}  // namespace vp1d
