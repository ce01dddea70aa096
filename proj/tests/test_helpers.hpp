#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "mega/trackworld.hpp"

namespace mega::test {

// 10 m square room: 102x102 cells at 0.1 m, 1-cell occupied border, free
// interior covering roughly [0.1, 10.0] in both axes.
inline OccupancyGrid make_room_grid(int cells = 102, double res = 0.1) {
  OccupancyGrid g(cells, cells, res, {0.0, 0.0});
  for (int j = 0; j < cells; ++j)
    for (int i = 0; i < cells; ++i)
      g.set_occupied(i, j, i == 0 || j == 0 || i == cells - 1 || j == cells - 1);
  g.build_distance_field();
  return g;
}

inline Lane make_square_centerline(double speed = 4.0) {
  std::vector<Waypoint> pts;
  auto edge = [&](double x0, double y0, double x1, double y1) {
    for (int k = 0; k < 24; ++k) {
      const double t = k / 24.0;
      pts.push_back({x0 + t * (x1 - x0), y0 + t * (y1 - y0), speed});
    }
  };
  edge(2, 2, 8, 2);
  edge(8, 2, 8, 8);
  edge(8, 8, 2, 8);
  edge(2, 8, 2, 2);
  return Lane(pts, true).resampled(0.1);
}

inline TrackWorld make_square_world() {
  TrackWorld w;
  w.grid = make_room_grid();
  w.centerline = make_square_centerline();
  w.lane_left = w.centerline.offset(0.8).resampled(0.1);
  w.lane_right = w.centerline.offset(-0.8).resampled(0.1);
  return w;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("megatest_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace mega::test
