#include "vp1d/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "vp1d/errors.hpp"

namespace vp1d {

std::string to_string(TailMode mode) { return mode == TailMode::PowerLaw ? "power-law" : "zero"; }

TailMode tail_mode_from_string(const std::string& name) {
  if (name == "power-law") return TailMode::PowerLaw;
  if (name == "zero") return TailMode::Zero;
  throw InvalidParameter("unknown tail mode '" + name + "' (expected power-law or zero)");
}

DensityIntegrator::DensityIntegrator(const PhaseGrid& grid, const BackgroundProfile& background, double p)
    : grid_(grid), exponent_(p), weights_(simpson_weights(grid.nv(), grid.v().spacing())) {
  if (!(p > 1.0)) throw InvalidParameter("density exponent must exceed 1");
  for (std::size_t i = 0; i < grid.nv(); ++i) background_mass_ += weights_[i] * background.value(grid.v()[i]);
}

double DensityIntegrator::integrate_row(std::span<const double> row) const noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) sum += weights_[i] * row[i];
  return sum;
}

DensitySnapshot DensityIntegrator::operator()(PhaseView f, double time) const {
  if (f.nx != grid_.nx() || f.nv != grid_.nv() || f.data.size() != grid_.slice_size()) {
    throw InvalidParameter("phase slice does not match grid");
  }
  DensitySnapshot out;
  out.time = time;
  out.exponent = exponent_;
  out.rho.resize(grid_.nx());
  for (std::size_t j = 0; j < grid_.nx(); ++j) {
    const auto row = f.row(j);
    for (double value : row) {
      if (!std::isfinite(value)) throw InvalidProfile("non-finite distribution value");
    }
    // int (F - f) dv with both integrals taken by the same rule
    out.rho[j] = background_mass_ - integrate_row(row);
  }
  out.weighted_norm = weighted_sup_norm(out.profile(), grid_.x());
  return out;
}

DensitySnapshot charge_density(PhaseView f, const PhaseGrid& grid, const BackgroundProfile& background,
                               double time, double p) {
  return DensityIntegrator(grid, background, p)(f, time);
}

double FieldSnapshot::sup_abs() const noexcept {
  double sup = 0.5 * std::abs(total_charge);
  for (double e : E) sup = std::max(sup, std::abs(e));
  return sup;
}

FieldSnapshot field_from_density(const DensitySnapshot& rho, const SymmetricAxis& x, TailMode mode) {
  if (rho.rho.size() != x.size()) throw InvalidParameter("density does not match axis");
  if (!(rho.exponent > 1.0)) throw InvalidParameter("field exponent must exceed 1");
  for (double value : rho.rho) {
    if (!std::isfinite(value)) throw InvalidProfile("non-finite density value");
  }
  FieldSnapshot out;
  out.time = rho.time;
  const std::size_t n = x.size();
  if (mode == TailMode::PowerLaw) {
    const double edge = x[n - 1];
    const double rl = weight_pow(edge, rho.exponent);
    const double tail_integral = weight_integral(rho.exponent, edge, std::numeric_limits<double>::infinity());
    out.tail_minus = rho.rho.front() * rl;
    out.tail_plus = rho.rho.back() * rl;
    out.tail_mass_minus = out.tail_minus * tail_integral;
    out.tail_mass_plus = out.tail_plus * tail_integral;
  }
  const auto prefix = trapezoid_prefix(rho.rho, x.spacing());
  out.total_charge = out.tail_mass_minus + prefix.back() + out.tail_mass_plus;
  const double half = 0.5 * out.total_charge;
  out.E.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.E[j] = (out.tail_mass_minus + prefix[j]) - half;
  return out;
}

FieldHistory::FieldHistory(SymmetricAxis x, TimeAxis t, std::vector<FieldSnapshot> snapshots, double p,
                           TailMode mode)
    : x_(x), t_(t), snapshots_(std::move(snapshots)), p_(p), mode_(mode) {
  if (snapshots_.size() != t_.size()) throw InvalidParameter("one field snapshot per time node required");
  for (const auto& snap : snapshots_) {
    if (snap.E.size() != x_.size()) throw InvalidParameter("field snapshot does not match axis");
  }
  inv_dx_ = 1.0 / x_.spacing();
  x_first_ = x_[0];
  x_last_ = x_[x_.size() - 1];

  const std::size_t nx = x_.size();
  if (nx < 4) throw InvalidParameter("cubic field interpolation needs at least 4 nodes");
  if (t_.size() < 2) throw InvalidParameter("field history needs at least 2 snapshots");
  inv_level_step_ = static_cast<double>(kStageLevels) / t_.step();
  max_level_ = static_cast<double>((t_.size() - 1) * kStageLevels);
  last_first_ = static_cast<std::ptrdiff_t>(nx) - 4;
  const std::size_t levels = (t_.size() - 1) * kStageLevels + 1;
  staged_.resize(levels * nx);
  for (std::size_t q = 0; q < levels; ++q) {
    const std::size_t m = std::min(q / kStageLevels, t_.size() - 2);
    const double theta = static_cast<double>(q - m * kStageLevels) / static_cast<double>(kStageLevels);
    const auto& a = snapshots_[m].E;
    const auto& b = snapshots_[m + 1].E;
    double* row = staged_.data() + q * nx;
    for (std::size_t j = 0; j < nx; ++j) row[j] = theta == 0.0 ? a[j] : (1.0 - theta) * a[j] + theta * b[j];
  }
}

double FieldHistory::interpolant_bound(std::size_t interval) const {
  return 1.25 * std::max(snapshots_.at(interval).sup_abs(), snapshots_.at(interval + 1).sup_abs());
}

double FieldHistory::tail_increment(const FieldSnapshot& snap, double x) const {
  if (mode_ == TailMode::Zero) return 0.0;
  if (x > x_last_) return snap.tail_plus * weight_integral(p_, x_last_, x);
  return -snap.tail_minus * weight_integral(p_, x, x_first_);
}

namespace {

struct Stencil {
  std::size_t first;  // index of the leftmost of four nodes
  double w[4];
};

// Lagrange weights on nodes first..first+3 at fractional offset u from node first+1.
inline Stencil make_stencil(double x, double x_first, double inv_dx, std::size_t n) {
  // callers guarantee x >= x_first, so truncation is floor and +0.5 rounds
  double s = (x - x_first) * inv_dx;
  // snap onto a node so that nodal values are reproduced bit for bit
  const auto nearest = static_cast<double>(static_cast<std::ptrdiff_t>(s + 0.5));
  if (std::abs(s - nearest) < 1e-9) s = nearest;
  auto cell = static_cast<std::ptrdiff_t>(s);
  cell = std::clamp<std::ptrdiff_t>(cell, 0, static_cast<std::ptrdiff_t>(n) - 2);
  auto first = std::clamp<std::ptrdiff_t>(cell - 1, 0, static_cast<std::ptrdiff_t>(n) - 4);
  const double u = s - static_cast<double>(first + 1);
  Stencil st;
  st.first = static_cast<std::size_t>(first);
  st.w[0] = -u * (u - 1.0) * (u - 2.0) / 6.0;
  st.w[1] = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
  st.w[2] = -(u + 1.0) * u * (u - 2.0) / 2.0;
  st.w[3] = (u + 1.0) * u * (u - 1.0) / 6.0;
  return st;
}

inline double apply_stencil(const Stencil& st, const std::vector<double>& values) noexcept {
  const double* v = values.data() + st.first;
  return st.w[0] * v[0] + st.w[1] * v[1] + st.w[2] * v[2] + st.w[3] * v[3];
}

}  // namespace

double FieldHistory::spatial(std::size_t m, double x) const {
  const auto& snap = snapshots_.at(m);
  if (x < x_first_) return snap.E.front() + tail_increment(snap, x);
  if (x > x_last_) return snap.E.back() + tail_increment(snap, x);
  return apply_stencil(make_stencil(x, x_first_, inv_dx_, x_.size()), snap.E);
}

double FieldHistory::evaluate(double t, double x) const {
  const double span = t_.end() - t_.start();
  const double slack = 1e-12 * std::max(1.0, span);
  if (!(t >= t_.start() - slack && t <= t_.end() + slack)) {
    throw OutOfRange("field requested at t = " + std::to_string(t) + " outside [" +
                     std::to_string(t_.start()) + ", " + std::to_string(t_.end()) + "]");
  }
  double s = std::clamp((t - t_.start()) / t_.step(), 0.0, static_cast<double>(t_.size() - 1));
  if (const double nearest = std::round(s); std::abs(s - nearest) < 1e-9) s = nearest;
  auto m = static_cast<std::size_t>(s);
  if (m + 1 >= t_.size()) m = t_.size() - 2;
  const double theta = s - static_cast<double>(m);

  const auto& a = snapshots_[m];
  const auto& b = snapshots_[m + 1];
  if (x < x_first_ || x > x_last_) {
    const double ea = (x < x_first_ ? a.E.front() : a.E.back()) + tail_increment(a, x);
    if (theta == 0.0) return ea;
    const double eb = (x < x_first_ ? b.E.front() : b.E.back()) + tail_increment(b, x);
    return (1.0 - theta) * ea + theta * eb;
  }
  const Stencil st = make_stencil(x, x_first_, inv_dx_, x_.size());
  const double ea = apply_stencil(st, a.E);
  if (theta == 0.0) return ea;
  return (1.0 - theta) * ea + theta * apply_stencil(st, b.E);
}

double field_interp(const FieldHistory& history, double t, double x) { return history(t, x); }

FieldHistory build_field_history(const std::vector<DensitySnapshot>& densities, const SymmetricAxis& x,
                                 const TimeAxis& t, TailMode mode) {
  if (densities.empty()) throw InvalidParameter("no densities to build a field from");
  std::vector<FieldSnapshot> snaps;
  snaps.reserve(densities.size());
  for (const auto& rho : densities) snaps.push_back(field_from_density(rho, x, mode));
  return FieldHistory(x, t, std::move(snaps), densities.front().exponent, mode);
}

FieldConsistency check_field_density(std::span<const double> E, std::span<const double> rho,
                                     const SymmetricAxis& x) {
  const std::size_t n = x.size();
  if (E.size() != n || rho.size() != n) throw InvalidParameter("field/density size mismatch");
  const double dx = x.spacing();
  FieldConsistency out;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double dE = (E[j + 1] - E[j - 1]) / (2.0 * dx);
    out.max_error = std::max(out.max_error, std::abs(dE - rho[j]));
    out.expected_error = std::max(out.expected_error, std::abs(rho[j + 1] - 2.0 * rho[j] + rho[j - 1]) / 4.0);
  }
  out.error_constant = out.max_error / (dx * dx);
  const auto prefix = trapezoid_prefix(rho, dx);
  out.box_mass_error = std::abs(E[n - 1] - E[0] - prefix.back());
  return out;
}

}  // namespace vp1d
