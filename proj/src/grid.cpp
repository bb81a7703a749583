#include "vp1d/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vp1d/errors.hpp"

namespace vp1d {

SymmetricAxis::SymmetricAxis(double half_width, std::size_t count)
    : half_width_(half_width), count_(count) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidParameter("axis half width must be positive and finite");
  }
  if (count < 3 || count % 2 == 0) {
    throw InvalidParameter("axis node count must be odd and >= 3, got " + std::to_string(count));
  }
  spacing_ = half_width / static_cast<double>(center());
}

std::vector<double> SymmetricAxis::nodes() const {
  std::vector<double> out(count_);
  for (std::size_t k = 0; k < count_; ++k) out[k] = (*this)[k];
  return out;
}

TimeAxis::TimeAxis(double start, double end, std::size_t count)
    : start_(start), end_(end), count_(count) {
  if (count < 2) throw InvalidParameter("time axis needs at least 2 nodes");
  if (!(end > start) || !std::isfinite(start) || !std::isfinite(end)) {
    throw InvalidParameter("time axis must have end > start");
  }
  step_ = (end - start) / static_cast<double>(count - 1);
}

PhaseGrid::PhaseGrid(const PhaseGridParams& params)
    : PhaseGrid(SymmetricAxis(params.x_half_width, params.x_count),
                SymmetricAxis(params.v_half_width, params.v_count),
                TimeAxis(0.0, params.time_horizon, params.time_count)) {}

PhaseGrid::PhaseGrid(SymmetricAxis x, SymmetricAxis v, TimeAxis t)
    : x_(x), v_(v), t_(t) {}

double weight(double x) noexcept { return std::sqrt(1.0 + x * x); }

double weight_pow(double x, double p) noexcept {
  const double r2 = 1.0 + x * x;
  if (p == 2.0) return r2;
  return std::pow(r2, 0.5 * p);
}

namespace {

double weight_integral_positive(double p, double a, double b) {
  // 0 <= a < b <= inf
  if (p == 2.0) {
    const double hi = std::isinf(b) ? 0.5 * std::numbers::pi : std::atan(b);
    return hi - std::atan(a);
  }
  auto integrand = [p](double y) { return std::pow(1.0 + y * y, -0.5 * p); };
  if (std::isinf(b)) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(
        [&](double y) { return integrand(a + y); }, 0.0, std::numeric_limits<double>::infinity());
  }
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, b, 15, 1e-14);
}

}  // namespace

double weight_integral(double p, double a, double b) {
  if (!(p > 1.0)) throw InvalidParameter("weight exponent must exceed 1");
  if (a == b) return 0.0;
  if (a > b) return -weight_integral(p, b, a);
  if (a >= 0.0) return weight_integral_positive(p, a, b);
  if (b <= 0.0) return weight_integral_positive(p, -b, -a);
  return weight_integral_positive(p, 0.0, -a) + weight_integral_positive(p, 0.0, b);
}

namespace {

void check_profile(const WeightedProfile& sigma, const SymmetricAxis& x) {
  if (!(sigma.exponent > 1.0)) throw InvalidParameter("weighted norm exponent must exceed 1");
  if (sigma.values.size() != x.size()) {
    throw InvalidParameter("profile has " + std::to_string(sigma.values.size()) +
                           " values for an axis of " + std::to_string(x.size()) + " nodes");
  }
}

}  // namespace

WeightedNormReport weighted_sup_report(const WeightedProfile& sigma, const SymmetricAxis& x) {
  check_profile(sigma, x);
  WeightedNormReport report;
  for (std::size_t j = 0; j < sigma.values.size(); ++j) {
    const double value = sigma.values[j];
    if (!std::isfinite(value)) throw InvalidProfile("non-finite profile value at node " + std::to_string(j));
    const double weighted = std::abs(value) * weight_pow(x[j], sigma.exponent);
    if (weighted > report.norm) {
      report.norm = weighted;
      report.argmax = j;
    }
  }
  const std::size_t last = x.size() - 1;
  report.boundary_value =
      std::max(std::abs(sigma.values[0]) * weight_pow(x[0], sigma.exponent),
               std::abs(sigma.values[last]) * weight_pow(x[last], sigma.exponent));
  return report;
}

double weighted_sup_norm(const WeightedProfile& sigma, const SymmetricAxis& x) {
  return weighted_sup_report(sigma, x).norm;
}

std::vector<double> simpson_weights(std::size_t n, double h) {
  if (n < 3 || n % 2 == 0) throw InvalidParameter("Simpson's rule needs an odd node count >= 3");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = (i == 0 || i + 1 == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[i] *= h / 3.0;
  }
  return w;
}

double simpson(std::span<const double> values, double h) {
  const auto w = simpson_weights(values.size(), h);
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += w[i] * values[i];
  return sum;
}

std::vector<double> trapezoid_prefix(std::span<const double> values, double h) {
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t k = 1; k < values.size(); ++k) {
    out[k] = out[k - 1] + 0.5 * h * (values[k - 1] + values[k]);
  }
  return out;
}

namespace {

// Second-order difference along a strided line: centered inside, one-sided
// three-point formulas at both ends.
double diff2(const double* line, std::size_t stride, std::size_t n, std::size_t k, double h) {
  auto at = [&](std::size_t q) { return line[q * stride]; };
  if (k == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (k + 1 == n) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
  return (at(k + 1) - at(k - 1)) / (2.0 * h);
}

}  // namespace

TripleNormParts triple_norm_parts(PhaseView h, const PhaseGrid& grid, double p) {
  if (!(p > 1.0)) throw InvalidParameter("triple norm exponent must exceed 1");
  const std::size_t nx = grid.nx();
  const std::size_t nv = grid.nv();
  if (h.nx != nx || h.nv != nv || h.data.size() != nx * nv) {
    throw InvalidParameter("phase slice does not match grid");
  }
  const double dx = grid.x().spacing();
  const double dv = grid.v().spacing();
  const auto wv = simpson_weights(nv, dv);

  TripleNormParts parts;
  for (std::size_t j = 0; j < nx; ++j) {
    const double* row = h.data.data() + j * nv;
    const double rp = weight_pow(grid.x()[j], p);
    double density = 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
      const double value = row[i];
      if (!std::isfinite(value)) throw InvalidProfile("non-finite phase-space value");
      parts.sup = std::max(parts.sup, std::abs(value));
      parts.sup_dv = std::max(parts.sup_dv, std::abs(diff2(row, 1, nv, i, dv)));
      const double dxh = diff2(h.data.data() + i, nv, nx, j, dx);
      parts.weighted_dx = std::max(parts.weighted_dx, std::abs(dxh) * rp);
      density += wv[i] * value;
    }
    parts.weighted_density = std::max(parts.weighted_density, std::abs(density) * rp);
  }
  return parts;
}

double triple_norm(PhaseView h, const PhaseGrid& grid, double p) {
  return triple_norm_parts(h, grid, p).total();
}

}  // namespace vp1d
