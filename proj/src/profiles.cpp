#include "vp1d/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "vp1d/errors.hpp"

namespace vp1d {

namespace {

// (W - v)(W + v) keeps full relative precision next to the support edge.
inline double edge_gap(double w, double v) noexcept { return (w - v) * (w + v); }

}  // namespace

double BackgroundProfile::value(double v) const noexcept {
  if (std::abs(v) >= support_) return 0.0;
  const double u = edge_gap(support_, v);
  const double u2 = u * u;
  return amplitude_ * u2 * u2 * inv_w8_;
}

double BackgroundProfile::d1(double v) const noexcept {
  if (std::abs(v) >= support_) return 0.0;
  const double u = edge_gap(support_, v);
  return -8.0 * amplitude_ * v * u * u * u * inv_w8_;
}

double BackgroundProfile::d2(double v) const noexcept {
  if (std::abs(v) >= support_) return 0.0;
  const double u = edge_gap(support_, v);
  return -8.0 * amplitude_ * u * u * (u - 6.0 * v * v) * inv_w8_;
}

double BackgroundProfile::d3(double v) const noexcept {
  if (std::abs(v) >= support_) return 0.0;
  const double u = edge_gap(support_, v);
  return 48.0 * amplitude_ * v * u * (3.0 * u - 4.0 * v * v) * inv_w8_;
}

double BackgroundProfile::edge_third_difference_jump() const {
  const double h = 1e-8 * support_;
  double worst = 0.0;
  for (double edge : {-support_, support_}) {
    const double inward = edge > 0 ? -h : h;
    auto third = [&](double dir) {
      return (value(edge + 3 * dir) - 3 * value(edge + 2 * dir) + 3 * value(edge + dir) - value(edge)) /
             (dir * dir * dir);
    };
    worst = std::max(worst, std::abs(third(inward) - third(-inward)));
  }
  return worst;
}

BackgroundProfile make_background(double support_radius, double amplitude) {
  if (!(support_radius > 0.0) || !std::isfinite(support_radius)) {
    throw InvalidParameter("background support radius W must be positive");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw InvalidParameter("background amplitude A_F must be positive");
  }
  BackgroundProfile bg;
  bg.support_ = support_radius;
  bg.amplitude_ = amplitude;
  const double w2 = support_radius * support_radius;
  bg.inv_w8_ = 1.0 / (w2 * w2 * w2 * w2);
  const double jump = bg.edge_third_difference_jump();
  const double limit = 1e-4 * amplitude / (support_radius * support_radius * support_radius);
  if (!(jump <= limit)) {
    throw InvalidParameter("background fails the C3 edge check");
  }
  return bg;
}

PerturbationShape builtin_shape(const std::string& tag, double support_radius, double p) {
  double radius = 0.0;
  if (tag == "separable-bump") {
    radius = support_radius;
  } else if (tag == "narrow-bump") {
    radius = 0.5 * support_radius;
  } else {
    throw InvalidParameter("unknown perturbation shape '" + tag + "'");
  }
  if (!(p > 1.0)) throw InvalidParameter("decay exponent p must exceed 1");
  const double r2 = radius * radius;
  const double inv_r8 = 1.0 / (r2 * r2 * r2 * r2);
  auto phi = [radius, inv_r8](double v) {
    if (std::abs(v) >= radius) return 0.0;
    const double u = edge_gap(radius, v);
    return u * u * u * u * inv_r8;
  };
  auto dphi = [radius, inv_r8](double v) {
    if (std::abs(v) >= radius) return 0.0;
    const double u = edge_gap(radius, v);
    return -8.0 * v * u * u * u * inv_r8;
  };
  PerturbationShape shape;
  shape.tag = tag;
  shape.value = [phi, p](double x, double v) { return phi(v) / weight_pow(x, p); };
  shape.dv = [dphi, p](double x, double v) { return dphi(v) / weight_pow(x, p); };
  shape.support = radius;
  return shape;
}

std::vector<double> InitialData::sample_g0(const PhaseGrid& grid) const {
  std::vector<double> out(grid.slice_size());
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    for (std::size_t i = 0; i < grid.nv(); ++i) out[j * grid.nv() + i] = g0(grid.x()[j], grid.v()[i]);
  }
  return out;
}

std::vector<double> InitialData::sample_f0(const PhaseGrid& grid) const {
  std::vector<double> out(grid.slice_size());
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    for (std::size_t i = 0; i < grid.nv(); ++i) out[j * grid.nv() + i] = f0(grid.x()[j], grid.v()[i]);
  }
  return out;
}

InitialData make_initial_data(const BackgroundProfile& background, double amplitude, double p,
                              PerturbationShape shape, const PhaseGrid& grid) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidParameter("decay exponent p must exceed 1");
  if (!std::isfinite(amplitude)) throw InvalidParameter("perturbation amplitude must be finite");
  if (!shape.value || !shape.dv) throw InvalidParameter("perturbation shape has no evaluator");

  InitialData data;
  data.background_ = background;
  data.shape_ = std::move(shape);
  data.amplitude_ = amplitude;
  data.exponent_ = p;

  ValidationReport report;
  report.min_f0 = std::numeric_limits<double>::infinity();
  report.max_f0 = -std::numeric_limits<double>::infinity();
  double measured_support = 0.0;
  const double floor = -1e-14 * background.amplitude();
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    const double x = grid.x()[j];
    const double rp = weight_pow(x, p);
    for (std::size_t i = 0; i < grid.nv(); ++i) {
      const double v = grid.v()[i];
      const double g = data.g0(x, v);
      const double dg = data.dv_g0(x, v);
      const double f = background.value(v) - g;
      if (!std::isfinite(g) || !std::isfinite(dg)) throw InvalidProfile("non-finite initial perturbation");
      if (f < floor) {
        throw PositivityViolation("f0 = F - g0 is negative (" + std::to_string(f) + ") at x = " +
                                  std::to_string(x) + ", v = " + std::to_string(v));
      }
      report.min_f0 = std::min(report.min_f0, f);
      report.max_f0 = std::max(report.max_f0, f);
      report.decay_constant = std::max(report.decay_constant, (std::abs(g) + std::abs(dg)) * rp);
      if (std::abs(g) > 1e-14) measured_support = std::max(measured_support, std::abs(v));
    }
  }
  const auto g0 = data.sample_g0(grid);
  report.triple_norm = triple_norm(PhaseView{g0, grid.nx(), grid.nv()}, grid, p);
  if (!std::isfinite(report.triple_norm)) throw InvalidProfile("initial perturbation has infinite triple norm");
  report.support = data.shape_.support.value_or(measured_support);
  data.report_ = report;
  return data;
}

InitialData make_initial_data(const BackgroundProfile& background, double amplitude, double p,
                              const std::string& shape_tag, const PhaseGrid& grid) {
  return make_initial_data(background, amplitude, p,
                           builtin_shape(shape_tag, background.support_radius(), p), grid);
}

}  // namespace vp1d
