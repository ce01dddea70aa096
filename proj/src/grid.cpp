#include "mega/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace mega {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution,
                             Vec2 origin)
    : width_(width), height_(height), resolution_(resolution), origin_(origin),
      cells_(static_cast<std::size_t>(width) * height, 0) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("grid: empty");
  if (resolution <= 0.0) throw std::invalid_argument("grid: resolution <= 0");
}

bool OccupancyGrid::closed_boundary() const {
  for (int i = 0; i < width_; ++i)
    if (!occupied(i, 0) || !occupied(i, height_ - 1)) return false;
  for (int j = 0; j < height_; ++j)
    if (!occupied(0, j) || !occupied(width_ - 1, j)) return false;
  return true;
}

double OccupancyGrid::raycast(const Vec2& start, double angle,
                              double max_range) const {
  int i, j;
  cell_of(start, i, j);
  if (!in_bounds(i, j) || occupied(i, j))
    throw std::runtime_error("raycast: start inside occupied cell");

  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const int step_i = dx > 0 ? 1 : -1;
  const int step_j = dy > 0 ? 1 : -1;

  // distance to the first vertical / horizontal cell boundary
  auto boundary_t = [&](double p, double o, int idx, double d, int step) {
    if (std::abs(d) < 1e-15) return std::numeric_limits<double>::infinity();
    const double edge = o + (idx + 0.5 * step) * resolution_;
    return (edge - p) / d;
  };
  double t_max_x = boundary_t(start.x, origin_.x, i, dx, step_i);
  double t_max_y = boundary_t(start.y, origin_.y, j, dy, step_j);
  const double t_delta_x =
      std::abs(dx) < 1e-15 ? std::numeric_limits<double>::infinity()
                           : resolution_ / std::abs(dx);
  const double t_delta_y =
      std::abs(dy) < 1e-15 ? std::numeric_limits<double>::infinity()
                           : resolution_ / std::abs(dy);

  while (true) {
    double t;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      i += step_i;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      j += step_j;
    }
    if (t >= max_range) return max_range;
    if (!in_bounds(i, j) || occupied(i, j)) return t;
  }
}

double OccupancyGrid::raycast_marching(const Vec2& start, double angle,
                                       double max_range, double step) const {
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  for (double t = step; t < max_range; t += step) {
    if (occupied_at({start.x + t * dx, start.y + t * dy})) return t;
  }
  return max_range;
}

void OccupancyGrid::build_distance_field() {
  // multi-source Dijkstra over the 8-neighborhood; chamfer distances are
  // an upper bound on the true Euclidean distance to the nearest site
  const std::size_t n = cells_.size();
  dist_field_.assign(n, std::numeric_limits<float>::infinity());
  using QE = std::pair<float, std::uint32_t>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> q;
  for (std::size_t k = 0; k < n; ++k) {
    if (cells_[k]) {
      dist_field_[k] = 0.f;
      q.push({0.f, static_cast<std::uint32_t>(k)});
    }
  }
  const float diag = static_cast<float>(resolution_ * std::sqrt(2.0));
  const float orth = static_cast<float>(resolution_);
  while (!q.empty()) {
    auto [d, k] = q.top();
    q.pop();
    if (d > dist_field_[k]) continue;
    const int i = static_cast<int>(k % width_);
    const int j = static_cast<int>(k / width_);
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ni = i + di, nj = j + dj;
        if (!in_bounds(ni, nj)) continue;
        const std::size_t nk = static_cast<std::size_t>(nj) * width_ + ni;
        const float nd = d + ((di != 0 && dj != 0) ? diag : orth);
        if (nd < dist_field_[nk]) {
          dist_field_[nk] = nd;
          q.push({nd, static_cast<std::uint32_t>(nk)});
        }
      }
    }
  }
}

Vec2 OccupancyGrid::nearest_occupied(const Vec2& p) const {
  int pi, pj;
  cell_of(p, pi, pj);
  pi = std::clamp(pi, 0, width_ - 1);
  pj = std::clamp(pj, 0, height_ - 1);

  // upper bound on the search radius, from the distance field if present
  double bound = std::hypot(width_ * resolution_, height_ * resolution_);
  if (!dist_field_.empty()) {
    const double d = dist_field_[static_cast<std::size_t>(pj) * width_ + pi];
    bound = d + 2.0 * resolution_;  // slack for chamfer error + in-cell offset
  }

  double best_d2 = std::numeric_limits<double>::infinity();
  long best_idx = -1;
  const int r_hard = std::max(width_, height_);
  for (int r = 0; r <= r_hard; ++r) {
    // every cell in ring r is at least (r - 1) * resolution away from p
    const double ring_min = (r - 1) * resolution_;
    if (best_idx >= 0 && ring_min * ring_min > best_d2) break;
    if (ring_min > bound) break;
    auto visit = [&](int i, int j) {
      if (!in_bounds(i, j) || !occupied(i, j)) return;
      const Vec2 c = cell_center(i, j);
      const double d2 = (c - p).norm2();
      const long idx = static_cast<long>(j) * width_ + i;
      if (d2 < best_d2 || (d2 == best_d2 && idx < best_idx)) {
        best_d2 = d2;
        best_idx = idx;
      }
    };
    if (r == 0) {
      visit(pi, pj);
      continue;
    }
    for (int i = pi - r; i <= pi + r; ++i) {
      visit(i, pj - r);
      visit(i, pj + r);
    }
    for (int j = pj - r + 1; j <= pj + r - 1; ++j) {
      visit(pi - r, j);
      visit(pi + r, j);
    }
  }
  if (best_idx < 0) throw std::runtime_error("nearest_occupied: no occupied cell");
  return cell_center(static_cast<int>(best_idx % width_),
                     static_cast<int>(best_idx / width_));
}

double OccupancyGrid::distance_to_nearest_occupied(const Vec2& p) const {
  return (nearest_occupied(p) - p).norm();
}

OccupancyGrid OccupancyGrid::load_pgm(const std::string& path, double resolution,
                                      Vec2 origin, int occupied_threshold) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open map image: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5" && magic != "P2")
    throw std::runtime_error("map image is not an 8-bit PGM: " + path);
  auto next_int = [&]() {
    // skip whitespace and '#' comments
    int c;
    while ((c = f.peek()) != EOF) {
      if (c == '#') {
        std::string line;
        std::getline(f, line);
      } else if (std::isspace(c)) {
        f.get();
      } else {
        break;
      }
    }
    int v;
    f >> v;
    return v;
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("bad PGM header: " + path);

  OccupancyGrid g(w, h, resolution, origin);
  if (magic == "P5") {
    f.get();  // single whitespace after maxval
    std::vector<std::uint8_t> row(w);
    for (int r = 0; r < h; ++r) {
      f.read(reinterpret_cast<char*>(row.data()), w);
      if (!f) throw std::runtime_error("truncated PGM: " + path);
      for (int i = 0; i < w; ++i)
        g.set_occupied(i, h - 1 - r, row[i] < occupied_threshold);
    }
  } else {
    for (int r = 0; r < h; ++r)
      for (int i = 0; i < w; ++i) {
        const int v = next_int();
        g.set_occupied(i, h - 1 - r, v < occupied_threshold);
      }
  }
  return g;
}

void OccupancyGrid::save_pgm(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write map image: " + path);
  f << "P5\n" << width_ << " " << height_ << "\n255\n";
  std::vector<std::uint8_t> row(width_);
  for (int r = 0; r < height_; ++r) {
    for (int i = 0; i < width_; ++i)
      row[i] = occupied(i, height_ - 1 - r) ? 0 : 255;
    f.write(reinterpret_cast<const char*>(row.data()), width_);
  }
}

}  // namespace mega
