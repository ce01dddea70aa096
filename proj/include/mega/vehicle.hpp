#pragma once

#include <algorithm>
#include <cmath>

#include "mega/geom.hpp"

namespace mega {

struct VehicleState {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad, normalized to (-pi, pi]
  double v = 0.0;      // m/s, >= 0
  double delta = 0.0;  // current steering angle, rad
};

struct Action {
  double steering = 0.0;  // rad
  double speed = 0.0;     // commanded, m/s
};

struct VehicleParams {
  double wheelbase = 0.33;     // m
  double max_steer = 0.41;     // rad
  double max_speed = 8.0;      // m/s
  double steer_rate = 3.2;     // rad/s
  double accel = 9.0;          // m/s^2
  double footprint_length = 0.5;
  double footprint_width = 0.3;
};

inline Action saturate(const Action& a, const VehicleParams& p) {
  return {std::clamp(a.steering, -p.max_steer, p.max_steer),
          std::clamp(a.speed, 0.0, p.max_speed)};
}

// Kinematic bicycle with first-order actuator dynamics, explicit Euler.
inline VehicleState step_dynamics(const VehicleState& s, const Action& a,
                                  const VehicleParams& p, double dt) {
  VehicleState n = s;
  const double dmax = p.steer_rate * dt;
  n.delta = s.delta + std::clamp(a.steering - s.delta, -dmax, dmax);
  const double vmax_step = p.accel * dt;
  n.v = s.v + std::clamp(a.speed - s.v, -vmax_step, vmax_step);
  n.v = std::clamp(n.v, 0.0, p.max_speed);

  n.x = s.x + n.v * std::cos(s.theta) * dt;
  n.y = s.y + n.v * std::sin(s.theta) * dt;
  n.theta = wrap_angle(s.theta + n.v / p.wheelbase * std::tan(n.delta) * dt);
  return n;
}

inline OrientedRect footprint(const VehicleState& s, const VehicleParams& p) {
  return {{s.x, s.y}, s.theta, p.footprint_length, p.footprint_width};
}

}  // namespace mega
