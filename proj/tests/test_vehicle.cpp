#include <doctest.h>

#include <cmath>

#include "mega/rng.hpp"
#include "mega/vehicle.hpp"

using namespace mega;

TEST_CASE("saturate clamps steering and speed") {
  VehicleParams p;
  CHECK(saturate({0.1, 2.0}, p).steering == doctest::Approx(0.1));
  CHECK(saturate({0.1, 2.0}, p).speed == doctest::Approx(2.0));
  CHECK(saturate({10.0 * p.max_steer, 2.0}, p).steering ==
        doctest::Approx(p.max_steer));
  CHECK(saturate({0.0, -1.0}, p).speed == doctest::Approx(0.0));
}

TEST_CASE("straight-line motion") {
  VehicleParams p;
  VehicleState s{0, 0, 0, 1.0, 0.0};
  const VehicleState n = step_dynamics(s, {0.0, 1.0}, p, 0.1);
  CHECK(n.x == doctest::Approx(0.1));
  CHECK(n.y == doctest::Approx(0.0));
  CHECK(n.theta == doctest::Approx(0.0));
}

TEST_CASE("zero speed command keeps the pose fixed") {
  VehicleParams p;
  VehicleState s{1, 2, 0.5, 0.0, 0.0};
  const VehicleState n = step_dynamics(s, {0.3, 0.0}, p, 0.01);
  CHECK(n.x == doctest::Approx(1.0));
  CHECK(n.y == doctest::Approx(2.0));
  CHECK(n.theta == doctest::Approx(0.5));
}

TEST_CASE("constant steering traces a circle of radius L/tan(delta)") {
  VehicleParams p;
  const double delta = 0.2, v = 2.0;
  VehicleState s{0, 0, 0, v, delta};
  // warm up so actuators are settled, then collect a full loop
  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  for (int k = 0; k < 4000; ++k) {
    s = step_dynamics(s, {delta, v}, p, 0.01);
    if (k > 500) {
      xmin = std::min(xmin, s.x);
      xmax = std::max(xmax, s.x);
      ymin = std::min(ymin, s.y);
      ymax = std::max(ymax, s.y);
    }
  }
  const double r_expected = p.wheelbase / std::tan(delta);
  const double r_measured = 0.25 * ((xmax - xmin) + (ymax - ymin));
  CHECK(r_measured == doctest::Approx(r_expected).epsilon(0.02));
}

TEST_CASE("heading stays normalized and speed stays in range") {
  VehicleParams p;
  Rng rng(11);
  VehicleState s{0, 0, 0, 0, 0};
  for (int k = 0; k < 5000; ++k) {
    const Action a = saturate(
        {rng.uniform(-1.0, 1.0), rng.uniform(-2.0, 12.0)}, p);
    s = step_dynamics(s, a, p, 0.01);
    CHECK(s.theta > -M_PI - 1e-12);
    CHECK(s.theta <= M_PI + 1e-12);
    CHECK(s.v >= 0.0);
    CHECK(s.v <= p.max_speed);
  }
}

TEST_CASE("mirrored steering mirrors the trajectory") {
  VehicleParams p;
  VehicleState a{0, 0, 0, 0, 0}, b{0, 0, 0, 0, 0};
  for (int k = 0; k < 800; ++k) {
    const double steer = 0.3 * std::sin(k * 0.01);
    a = step_dynamics(a, {steer, 3.0}, p, 0.01);
    b = step_dynamics(b, {-steer, 3.0}, p, 0.01);
    CHECK(a.x == doctest::Approx(b.x).epsilon(1e-9));
    CHECK(a.y == doctest::Approx(-b.y).epsilon(1e-9));
  }
}
