#pragma once

#include <stdexcept>
#include <vector>

#include "mega/geom.hpp"

namespace mega {

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;  // target speed, m/s
};

// Ordered waypoint path with arc-length parameterization. Closed lanes
// wrap from the last waypoint back to the first.
class Lane {
 public:
  Lane() = default;
  Lane(std::vector<Waypoint> pts, bool closed);

  const std::vector<Waypoint>& waypoints() const { return pts_; }
  const std::vector<double>& cumulative_arclength() const { return cum_; }
  bool closed() const { return closed_; }
  double length() const { return length_; }

  double wrap_s(double s) const {
    s = std::fmod(s, length_);
    if (s < 0.0) s += length_;
    return s;
  }

  // position / tangent heading / target speed at arc length s
  Waypoint point_at(double s) const;
  double heading_at(double s) const;

  // arc-length coordinate of the closest point on the lane, in [0, length)
  double project(const Vec2& p) const;
  double distance_to(const Vec2& p) const;

  // new lane with uniform waypoint spacing (linear interpolation)
  Lane resampled(double spacing) const;

  // lateral offset along the local left normal; positive = left of travel
  Lane offset(double lateral) const;

 private:
  void build();
  // segment count: closed lanes include the wrap segment
  std::size_t nseg() const { return closed_ ? pts_.size() : pts_.size() - 1; }
  const Waypoint& seg_end(std::size_t k) const {
    return pts_[(k + 1) % pts_.size()];
  }

  std::vector<Waypoint> pts_;
  std::vector<double> cum_;  // arc length at each waypoint, cum_[0] = 0
  bool closed_ = true;
  double length_ = 0.0;
};

inline Lane::Lane(std::vector<Waypoint> pts, bool closed)
    : pts_(std::move(pts)), closed_(closed) {
  if (pts_.size() < 3) throw std::invalid_argument("lane: need >= 3 waypoints");
  build();
}

inline void Lane::build() {
  cum_.resize(pts_.size());
  cum_[0] = 0.0;
  for (std::size_t k = 1; k < pts_.size(); ++k) {
    const Vec2 a{pts_[k - 1].x, pts_[k - 1].y};
    const Vec2 b{pts_[k].x, pts_[k].y};
    const double d = (b - a).norm();
    if (d <= 0.0) throw std::invalid_argument("lane: duplicate consecutive waypoints");
    cum_[k] = cum_[k - 1] + d;
  }
  length_ = cum_.back();
  if (closed_) {
    const Vec2 a{pts_.back().x, pts_.back().y};
    const Vec2 b{pts_.front().x, pts_.front().y};
    length_ += (b - a).norm();
  }
  if (length_ <= 0.0) throw std::invalid_argument("lane: zero length");
}

inline Waypoint Lane::point_at(double s) const {
  s = closed_ ? wrap_s(s) : std::clamp(s, 0.0, length_);
  std::size_t k = 0;
  while (k + 1 < pts_.size() && cum_[k + 1] <= s) ++k;
  const Waypoint& a = pts_[k];
  const Waypoint& b = seg_end(k);
  const double seg = (k + 1 < pts_.size() ? cum_[k + 1] : length_) - cum_[k];
  const double t = seg > 0.0 ? (s - cum_[k]) / seg : 0.0;
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y),
          a.speed + t * (b.speed - a.speed)};
}

inline double Lane::heading_at(double s) const {
  s = closed_ ? wrap_s(s) : std::clamp(s, 0.0, length_);
  std::size_t k = 0;
  while (k + 1 < pts_.size() && cum_[k + 1] <= s) ++k;
  if (!closed_ && k + 1 >= pts_.size()) k = pts_.size() - 2;
  const Waypoint& a = pts_[k];
  const Waypoint& b = seg_end(k);
  return std::atan2(b.y - a.y, b.x - a.x);
}

inline double Lane::project(const Vec2& p) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (std::size_t k = 0; k < nseg(); ++k) {
    const Vec2 a{pts_[k].x, pts_[k].y};
    const Vec2 b{seg_end(k).x, seg_end(k).y};
    const Vec2 ab = b - a;
    const double len2 = ab.norm2();
    double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 q = a + ab * t;
    const double d2 = (q - p).norm2();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = cum_[k] + t * std::sqrt(len2);
    }
  }
  return wrap_s(best_s);
}

inline double Lane::distance_to(const Vec2& p) const {
  const Waypoint q = point_at(project(p));
  return (Vec2{q.x, q.y} - p).norm();
}

inline Lane Lane::resampled(double spacing) const {
  if (spacing <= 0.0) throw std::invalid_argument("lane: spacing <= 0");
  const std::size_t n = std::max<std::size_t>(3, static_cast<std::size_t>(
                                                     std::floor(length_ / spacing)));
  const double step = length_ / static_cast<double>(n);
  std::vector<Waypoint> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(point_at(k * step));
  return Lane(std::move(out), closed_);
}

inline Lane Lane::offset(double lateral) const {
  std::vector<Waypoint> out;
  out.reserve(pts_.size());
  for (std::size_t k = 0; k < pts_.size(); ++k) {
    const double h = heading_at(cum_[k] + 1e-9);
    const Vec2 n{-std::sin(h), std::cos(h)};
    out.push_back({pts_[k].x + lateral * n.x, pts_[k].y + lateral * n.y,
                   pts_[k].speed});
  }
  return Lane(std::move(out), closed_);
}

}  // namespace mega
