#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "vp1d/characteristics.hpp"
#include "vp1d/errors.hpp"

using namespace vp1d;

namespace {

std::shared_ptr<const FieldHistory> sine_field(double start, double end, std::size_t nt) {
  const SymmetricAxis x(10.0, 20001);
  std::vector<double> E;
  for (std::size_t j = 0; j < x.size(); ++j) E.push_back(0.1 * std::sin(x[j]));
  return std::make_shared<const FieldHistory>(testing::frozen_field(x, TimeAxis(start, end, nt), E));
}

}  // namespace

TEST_SUITE("characteristics") {

TEST_CASE("free streaming") {
  const SymmetricAxis x(10.0, 201);
  const auto field = testing::frozen_field(x, TimeAxis(0.0, 1.0, 11), std::vector<double>(201, 0.0));
  const auto end = flow_backward(1.0, 2.0, 1.5, field);
  CHECK(end.x0 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(end.v0 == 1.5);
  CHECK(end.impulse == 0.0);
  CHECK_FALSE(end.left_box);
  const auto out = flow_backward(1.0, 9.5, 3.0, field);
  CHECK(out.x0 == doctest::Approx(6.5));
  const auto away = flow_backward(1.0, -9.5, 3.0, field);
  CHECK(away.left_box);
  CHECK(away.x0 == doctest::Approx(-12.5));
}

TEST_CASE("constant field is integrated exactly") {
  const SymmetricAxis x(10.0, 201);
  const double c = 0.3;
  const auto field = testing::frozen_field(x, TimeAxis(0.0, 1.0, 6), std::vector<double>(201, c));
  const double t = 1.0, y = 0.4, v = -0.7;
  const auto end = flow_backward(t, y, v, field, 1);
  CHECK(end.v0 == doctest::Approx(v + c * t).epsilon(1e-14));
  CHECK(end.x0 == doctest::Approx(y - v * t - 0.5 * c * t * t).epsilon(1e-14));
  CHECK(end.impulse == doctest::Approx(c * t).epsilon(1e-14));
  const auto mid = flow_backward_to(t, 0.4, y, v, field);
  CHECK(mid.v0 == doctest::Approx(v + c * 0.6).epsilon(1e-14));
}

TEST_CASE("RK4 is fourth order in the substep") {
  const auto field = sine_field(0.0, 2.0, 3);
  const auto reference = flow_backward(2.0, 0.8, 0.6, *field, 256);
  auto error = [&](std::size_t substeps) {
    const auto e = flow_backward(2.0, 0.8, 0.6, *field, substeps);
    return std::hypot(e.x0 - reference.x0, e.v0 - reference.v0);
  };
  const double e1 = error(1), e2 = error(2), e4 = error(4);
  CHECK(std::log2(e1 / e2) >= 3.8);
  CHECK(std::log2(e2 / e4) >= 3.8);
}

TEST_CASE("forward and backward flows invert each other") {
  const auto field = sine_field(0.0, 1.0, 11);
  CHECK(flow_roundtrip_error(1.0, 1.3, -0.4, *field) < 1e-6);
  const auto back = flow_backward(1.0, 1.3, -0.4, *field);
  const auto fwd = flow_forward(0.0, 1.0, back.x0, back.v0, *field);
  CHECK(fwd.x0 == doctest::Approx(1.3).epsilon(1e-6));
  CHECK(fwd.v0 == doctest::Approx(-0.4).epsilon(1e-6));
  CHECK(flow_jacobian(1.0, 1.3, -0.4, *field) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("velocity change is bounded by the impulse and the drift bound") {
  const auto field = sine_field(0.0, 1.0, 11);
  const FieldTimeline timeline(field);
  const double bound = velocity_drift_bound(timeline);
  CHECK(bound == doctest::Approx(1.25 * 0.1).epsilon(1e-6));
  for (double v : {-2.0, -0.3, 0.0, 0.5, 1.7}) {
    for (double y : {-3.0, 0.2, 1.57}) {
      const auto end = flow_backward_to(1.0, 0.0, y, v, timeline);
      CHECK(std::abs(end.v0 - v) <= end.impulse + 1e-12);
      CHECK(end.impulse <= bound);
      CHECK(end.impulse <= 0.1 + 1e-12);
    }
  }
}

TEST_CASE("timeline chains windows") {
  auto first = sine_field(0.0, 1.0, 11);
  auto second = sine_field(1.0, 1.5, 6);
  FieldTimeline timeline(first);
  timeline.append(second);
  CHECK(timeline.start() == 0.0);
  CHECK(timeline.end() == 1.5);
  CHECK(timeline.segment_index(0.5) == 0);
  CHECK(timeline.segment_index(1.0) == 0);
  CHECK(timeline.segment_index(1.2) == 1);
  CHECK(timeline.without_last().end() == 1.0);
  // one window over [0, 1.5] with the same field gives the same path
  const auto whole = sine_field(0.0, 1.5, 16);
  const auto a = flow_backward_to(1.5, 0.0, 0.7, 0.9, timeline);
  const auto b = flow_backward_to(1.5, 0.0, 0.7, 0.9, *whole);
  CHECK(a.x0 == doctest::Approx(b.x0).epsilon(1e-12));
  CHECK(a.v0 == doctest::Approx(b.v0).epsilon(1e-12));
  CHECK(velocity_drift_bound(timeline) == doctest::Approx(1.25 * 0.1 * 1.5).epsilon(1e-6));

  CHECK_THROWS_AS(timeline.append(sine_field(2.0, 3.0, 3)), InvalidParameter);
}

TEST_CASE("path dump and errors") {
  const auto field = sine_field(0.0, 1.0, 3);
  std::ostringstream out;
  dump_path_csv(out, 1.0, 0.0, 1.0, *field, 2);
  std::size_t lines = 0;
  for (char ch : out.str()) lines += ch == '\n';
  CHECK(lines == 1 + 5);
  CHECK_THROWS_AS(flow_backward(1.0, 0.0, 0.0, *field, 0), InvalidParameter);
}

}
