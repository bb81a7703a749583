#include "vp1d/characteristics.hpp"

#include <algorithm>
#include <iomanip>

namespace vp1d {

void FieldTimeline::append(std::shared_ptr<const FieldHistory> segment) {
  if (!segment) throw InvalidParameter("null field segment");
  if (!segments_.empty()) {
    const auto& last = *segments_.back();
    if (!(last.x() == segment->x())) throw InvalidParameter("field segments use different x axes");
    const double gap = std::abs(last.t().end() - segment->t().start());
    if (gap > 1e-12 * std::max(1.0, last.t().end())) {
      throw InvalidParameter("field segment does not start where the previous one ends");
    }
  }
  segments_.push_back(std::move(segment));
}

std::size_t FieldTimeline::segment_index(double t) const {
  if (segments_.empty()) throw OutOfRange("empty field timeline");
  const double slack = 1e-12 * std::max(1.0, std::abs(end()));
  if (t < start() - slack || t > end() + slack) {
    throw OutOfRange("time " + std::to_string(t) + " outside the field timeline");
  }
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    if (segments_[k]->t().end() >= t - slack) return k;
  }
  return segments_.size() - 1;
}

FieldTimeline FieldTimeline::without_last() const {
  FieldTimeline out;
  for (std::size_t k = 0; k + 1 < segments_.size(); ++k) out.segments_.push_back(segments_[k]);
  return out;
}

double velocity_drift_bound(const FieldTimeline& timeline) {
  double bound = 0.0;
  for (const auto& seg : timeline.segments()) {
    for (std::size_t k = 0; k + 1 < seg->t().size(); ++k) {
      bound += (seg->t()[k + 1] - seg->t()[k]) * seg->interpolant_bound(k);
    }
  }
  return bound;
}

CharEndpoint flow_backward(double t, double x, double v, const FieldHistory& history, std::size_t substeps) {
  return integrate_backward(history, t, history.t().start(), x, v, substeps, detail::NoObserver{});
}

CharEndpoint flow_backward_to(double t, double s_end, double x, double v, const FieldTimeline& timeline,
                              std::size_t substeps) {
  if (s_end > t) throw InvalidParameter("backward flow needs s_end <= t");
  return integrate_backward(timeline, t, s_end, x, v, substeps, detail::NoObserver{});
}

CharEndpoint flow_backward_to(double t, double s_end, double x, double v, const FieldHistory& history,
                              std::size_t substeps) {
  if (s_end > t) throw InvalidParameter("backward flow needs s_end <= t");
  return integrate_backward(history, t, s_end, x, v, substeps, detail::NoObserver{});
}

CharEndpoint flow_forward(double s, double t, double x, double v, const FieldHistory& history,
                          std::size_t substeps) {
  if (substeps == 0) throw InvalidParameter("substeps must be >= 1");
  if (s > t) throw InvalidParameter("forward flow needs s <= t");
  CharEndpoint out{x, v, 0.0, std::abs(x) > history.x().half_width()};
  const std::size_t n = detail::step_count(t - s, history.t().step() / static_cast<double>(substeps));
  if (n == 0) return out;
  const double h = (t - s) / static_cast<double>(n);
  // mirror of the backward step layout: nodes t - k h
  for (std::size_t k = n; k >= 1; --k) {
    const double from = k == n ? s : t - static_cast<double>(k) * h;
    const auto step = detail::rk4_step(history, from, out.x0, out.v0, h);
    out.x0 = step.x;
    out.v0 = step.v;
    out.impulse += step.impulse_increment;
    if (!std::isfinite(out.x0) || !std::isfinite(out.v0)) {
      throw IntegrationFailure("characteristic state became non-finite in forward flow");
    }
    if (std::abs(out.x0) > history.x().half_width()) out.left_box = true;
  }
  return out;
}

double flow_roundtrip_error(double t, double x, double v, const FieldHistory& history, std::size_t substeps) {
  const auto back = flow_backward(t, x, v, history, substeps);
  const auto forth = flow_forward(history.t().start(), t, back.x0, back.v0, history, substeps);
  return std::max(std::abs(forth.x0 - x), std::abs(forth.v0 - v));
}

double flow_jacobian(double t, double x, double v, const FieldHistory& history, std::size_t substeps,
                     double delta) {
  const auto xp = flow_backward(t, x + delta, v, history, substeps);
  const auto xm = flow_backward(t, x - delta, v, history, substeps);
  const auto vp = flow_backward(t, x, v + delta, history, substeps);
  const auto vm = flow_backward(t, x, v - delta, history, substeps);
  const double dXdx = (xp.x0 - xm.x0) / (2.0 * delta);
  const double dVdx = (xp.v0 - xm.v0) / (2.0 * delta);
  const double dXdv = (vp.x0 - vm.x0) / (2.0 * delta);
  const double dVdv = (vp.v0 - vm.v0) / (2.0 * delta);
  return dXdx * dVdv - dXdv * dVdx;
}

void dump_path_csv(std::ostream& out, double t, double x, double v, const FieldHistory& history,
                   std::size_t substeps) {
  out << "s,X,V\n" << std::setprecision(17);
  integrate_backward(history, t, history.t().start(), x, v, substeps,
                     [&](const FieldHistory&, std::size_t, double s, double px, double pv) {
                       out << s << ',' << px << ',' << pv << '\n';
                     });
}

}  // namespace vp1d
