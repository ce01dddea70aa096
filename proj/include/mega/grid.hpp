#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mega/geom.hpp"

namespace mega {

// Row-major occupancy grid. Cell (i, j) has world reference point
// origin + (i, j) * resolution and covers the square of side `resolution`
// centered on that point. Grid row j = 0 is the southernmost row (PGM
// image rows are flipped on load so that north is up).
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, Vec2 origin);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Vec2 origin() const { return origin_; }
  std::size_t cell_count() const { return cells_.size(); }

  bool in_bounds(int i, int j) const {
    return i >= 0 && j >= 0 && i < width_ && j < height_;
  }
  bool occupied(int i, int j) const {
    return cells_[static_cast<std::size_t>(j) * width_ + i] != 0;
  }
  void set_occupied(int i, int j, bool v) {
    cells_[static_cast<std::size_t>(j) * width_ + i] = v ? 1 : 0;
  }

  Vec2 cell_center(int i, int j) const {
    return {origin_.x + i * resolution_, origin_.y + j * resolution_};
  }
  // cell containing world point p
  void cell_of(const Vec2& p, int& i, int& j) const {
    i = static_cast<int>(std::floor((p.x - origin_.x) / resolution_ + 0.5));
    j = static_cast<int>(std::floor((p.y - origin_.y) / resolution_ + 0.5));
  }
  bool occupied_at(const Vec2& p) const {
    int i, j;
    cell_of(p, i, j);
    if (!in_bounds(i, j)) return true;  // outside the map counts as solid
    return occupied(i, j);
  }

  // true when all four border rows/columns are fully occupied
  bool closed_boundary() const;

  // Distance along the ray from `origin` with heading `angle` to the first
  // occupied cell, clipped to max_range. Grid DDA (exact cell stepping).
  // Throws if the start point lies in an occupied cell.
  double raycast(const Vec2& origin, double angle, double max_range) const;

  // Reference implementation: fixed-step marching at `step` meters.
  // Kept separate from raycast() so the two can be checked against each
  // other; tests rely on this independence.
  double raycast_marching(const Vec2& origin, double angle, double max_range,
                          double step) const;

  // Center of the occupied cell closest to p. Ties broken by lowest cell
  // index (j * width + i). Requires a closed boundary so a result exists.
  Vec2 nearest_occupied(const Vec2& p) const;
  double distance_to_nearest_occupied(const Vec2& p) const;

  // Coarse per-cell distance bound used to prune nearest_occupied queries.
  // Call once after the map is final.
  void build_distance_field();

  // 8-bit PGM (P2 or P5); pixel < occupied_threshold => occupied. Image
  // row 0 becomes the top (northernmost) grid row.
  static OccupancyGrid load_pgm(const std::string& path, double resolution,
                                Vec2 origin, int occupied_threshold);
  void save_pgm(const std::string& path) const;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.0;
  Vec2 origin_;
  std::vector<std::uint8_t> cells_;
  std::vector<float> dist_field_;  // per-cell upper bound, meters
};

}  // namespace mega
