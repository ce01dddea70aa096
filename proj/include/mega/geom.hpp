#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace mega {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
};

inline double wrap_angle(double a) {
  // normalize to (-pi, pi]
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

// Oriented rectangle: center, heading, full length (along heading) and width.
struct OrientedRect {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  std::array<Vec2, 4> corners() const {
    const double c = std::cos(heading), s = std::sin(heading);
    const double hl = 0.5 * length, hw = 0.5 * width;
    auto pt = [&](double lx, double ly) {
      return Vec2{center.x + c * lx - s * ly, center.y + s * lx + c * ly};
    };
    return {pt(hl, hw), pt(hl, -hw), pt(-hl, -hw), pt(-hl, hw)};
  }
};

// Separating-axis overlap test for two oriented rectangles.
inline bool rects_overlap(const OrientedRect& a, const OrientedRect& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  auto separated_on = [&](Vec2 axis) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (const auto& p : ca) {
      const double d = p.dot(axis);
      amin = std::min(amin, d);
      amax = std::max(amax, d);
    }
    for (const auto& p : cb) {
      const double d = p.dot(axis);
      bmin = std::min(bmin, d);
      bmax = std::max(bmax, d);
    }
    return amax < bmin || bmax < amin;
  };
  for (double h : {a.heading, b.heading}) {
    const Vec2 u{std::cos(h), std::sin(h)};
    const Vec2 v{-u.y, u.x};
    if (separated_on(u) || separated_on(v)) return false;
  }
  return true;
}

// Distance along ray (origin, unit dir) to an oriented rectangle via the
// slab test in the rectangle's local frame. Returns +inf on a miss; 0 if
// the origin is inside.
inline double ray_rect_distance(const Vec2& origin, const Vec2& dir,
                                const OrientedRect& r) {
  const double c = std::cos(r.heading), s = std::sin(r.heading);
  const Vec2 rel = origin - r.center;
  const Vec2 o{c * rel.x + s * rel.y, -s * rel.x + c * rel.y};
  const Vec2 d{c * dir.x + s * dir.y, -s * dir.x + c * dir.y};
  const double hx = 0.5 * r.length, hy = 0.5 * r.width;

  double tmin = 0.0;
  double tmax = std::numeric_limits<double>::infinity();
  const double half[2] = {hx, hy};
  const double od[2] = {o.x, o.y};
  const double dd[2] = {d.x, d.y};
  for (int i = 0; i < 2; ++i) {
    if (std::abs(dd[i]) < 1e-15) {
      if (std::abs(od[i]) > half[i]) return std::numeric_limits<double>::infinity();
    } else {
      double t1 = (-half[i] - od[i]) / dd[i];
      double t2 = (half[i] - od[i]) / dd[i];
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
      if (tmin > tmax) return std::numeric_limits<double>::infinity();
    }
  }
  return tmin;
}

}  // namespace mega
