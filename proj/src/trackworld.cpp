#include "mega/trackworld.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace mega {
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> parse_kv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open metadata: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void check_lane_free(const OccupancyGrid& grid, const Lane& lane,
                     const std::string& which) {
  for (const auto& w : lane.waypoints()) {
    if (grid.occupied_at({w.x, w.y}))
      throw std::runtime_error("lane intersects boundary: " + which);
  }
}

// pull waypoints that landed in occupied cells back toward the centerline
Lane repair_to_free(const OccupancyGrid& grid, const Lane& lane,
                    const Lane& centerline) {
  std::vector<Waypoint> pts = lane.waypoints();
  for (auto& w : pts) {
    if (!grid.occupied_at({w.x, w.y})) continue;
    const Waypoint c = centerline.point_at(centerline.project({w.x, w.y}));
    for (double t = 0.05; t <= 1.0; t += 0.05) {
      const double x = w.x + t * (c.x - w.x);
      const double y = w.y + t * (c.y - w.y);
      if (!grid.occupied_at({x, y})) {
        w.x = x;
        w.y = y;
        break;
      }
    }
  }
  return Lane(std::move(pts), lane.closed());
}

}  // namespace

std::vector<Waypoint> load_lane_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open lane file: " + path);
  std::vector<Waypoint> pts;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first && line.find("x_m") != std::string::npos) {
      first = false;
      continue;
    }
    first = false;
    std::stringstream ss(line);
    Waypoint w;
    char comma;
    if (ss >> w.x >> comma >> w.y >> comma >> w.speed) pts.push_back(w);
  }
  return pts;
}

void save_lane_csv(const std::string& path, const Lane& lane) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write lane file: " + path);
  f << "x_m,y_m,speed_mps\n";
  char buf[96];
  for (const auto& w : lane.waypoints()) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.3f\n", w.x, w.y, w.speed);
    f << buf;
  }
}

TrackWorld load_track(const std::string& map_image_path,
                      const std::string& metadata_path) {
  auto kv = parse_kv(metadata_path);
  auto need = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end())
      throw std::runtime_error("metadata missing key: " + k);
    return it->second;
  };
  const double resolution = std::stod(need("resolution"));
  const Vec2 origin{std::stod(need("origin_x")), std::stod(need("origin_y"))};
  const int thr = std::stoi(need("occupied_threshold"));
  const double spacing = kv.count("resample_spacing")
                             ? std::stod(kv["resample_spacing"])
                             : 0.1;
  const double lane_offset =
      kv.count("lane_offset") ? std::stod(kv["lane_offset"]) : 0.8;

  TrackWorld w;
  w.grid = OccupancyGrid::load_pgm(map_image_path, resolution, origin, thr);
  if (!w.grid.closed_boundary())
    throw std::runtime_error("open boundary detected in map: " + map_image_path);
  w.grid.build_distance_field();

  const fs::path base = fs::path(metadata_path).parent_path();
  auto resolve = [&](const std::string& p) { return (base / p).string(); };

  w.centerline =
      Lane(load_lane_csv(resolve(need("centerline"))), true).resampled(spacing);
  if (kv.count("lane_left") && kv.count("lane_right")) {
    w.lane_left =
        Lane(load_lane_csv(resolve(kv["lane_left"])), true).resampled(spacing);
    w.lane_right =
        Lane(load_lane_csv(resolve(kv["lane_right"])), true).resampled(spacing);
  } else {
    w.lane_left = w.centerline.offset(lane_offset).resampled(spacing);
    w.lane_right = w.centerline.offset(-lane_offset).resampled(spacing);
  }
  w.lane_left = repair_to_free(w.grid, w.lane_left, w.centerline);
  w.lane_right = repair_to_free(w.grid, w.lane_right, w.centerline);

  check_lane_free(w.grid, w.centerline, "centerline");
  check_lane_free(w.grid, w.lane_left, "lane_left");
  check_lane_free(w.grid, w.lane_right, "lane_right");
  return w;
}

std::vector<double> raycast(const TrackWorld& world, const Vec2& pos,
                            double theta, int n_beams, double fov,
                            double max_range) {
  if (n_beams < 1) throw std::invalid_argument("raycast: n_beams < 1");
  std::vector<double> ranges(n_beams);
  for (int i = 0; i < n_beams; ++i) {
    const double a =
        n_beams == 1
            ? theta
            : theta - 0.5 * fov + fov * static_cast<double>(i) / (n_beams - 1);
    ranges[i] = world.grid.raycast(pos, a, max_range);
  }
  return ranges;
}

Vec2 nearest_boundary_point(const TrackWorld& world, const Vec2& p) {
  return world.grid.nearest_occupied(p);
}

double progress(const TrackWorld& world, const Vec2& p) {
  return world.centerline.project(p);
}

namespace {

std::vector<Waypoint> synth_centerline(const SynthTrackSpec& spec) {
  std::vector<Waypoint> pts;
  const int n = 1440;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * M_PI * k / n;
    double x, y;
    if (spec.shape == 1) {
      // superellipse: rectangle with rounded corners
      const double A = 14.0, B = 9.0;
      const double c = std::cos(phi), s = std::sin(phi);
      x = A * (c < 0 ? -1 : 1) * std::sqrt(std::abs(c));
      y = B * (s < 0 ? -1 : 1) * std::sqrt(std::abs(s));
    } else {
      // two-lobe loop
      const double r = 12.0 + 3.0 * std::cos(2.0 * phi);
      x = r * std::cos(phi);
      y = r * std::sin(phi);
    }
    pts.push_back({x, y, spec.target_speed});
  }
  return pts;
}

}  // namespace

TrackWorld build_synthetic_track(const SynthTrackSpec& spec) {
  Lane center = Lane(synth_centerline(spec), true).resampled(0.1);

  double xmin = 1e30, xmax = -1e30, ymin = 1e30, ymax = -1e30;
  for (const auto& w : center.waypoints()) {
    xmin = std::min(xmin, w.x);
    xmax = std::max(xmax, w.x);
    ymin = std::min(ymin, w.y);
    ymax = std::max(ymax, w.y);
  }
  const double margin = spec.half_width + 1.0;
  const Vec2 origin{xmin - margin, ymin - margin};
  const int w = static_cast<int>(std::ceil((xmax - xmin + 2 * margin) /
                                           spec.resolution)) + 1;
  const int h = static_cast<int>(std::ceil((ymax - ymin + 2 * margin) /
                                           spec.resolution)) + 1;

  TrackWorld tw;
  tw.grid = OccupancyGrid(w, h, spec.resolution, origin);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) tw.grid.set_occupied(i, j, true);

  // carve the corridor by stamping discs along the centerline
  const double step = 0.5 * spec.resolution;
  const int rad = static_cast<int>(std::ceil(spec.half_width / spec.resolution));
  for (double s = 0.0; s < center.length(); s += step) {
    const Waypoint c = center.point_at(s);
    int ci, cj;
    tw.grid.cell_of({c.x, c.y}, ci, cj);
    for (int dj = -rad; dj <= rad; ++dj)
      for (int di = -rad; di <= rad; ++di) {
        const int i = ci + di, j = cj + dj;
        if (i <= 0 || j <= 0 || i >= w - 1 || j >= h - 1) continue;
        const Vec2 cc = tw.grid.cell_center(i, j);
        if ((cc - Vec2{c.x, c.y}).norm() < spec.half_width)
          tw.grid.set_occupied(i, j, false);
      }
  }
  tw.grid.build_distance_field();

  tw.centerline = center;
  tw.lane_left = center.offset(spec.lane_offset).resampled(0.1);
  tw.lane_right = center.offset(-spec.lane_offset).resampled(0.1);
  return tw;
}

void write_synthetic_track(const SynthTrackSpec& spec, const std::string& dir) {
  const TrackWorld tw = build_synthetic_track(spec);
  fs::create_directories(dir);
  const fs::path base = fs::path(dir) / spec.name;
  tw.grid.save_pgm(base.string() + ".pgm");
  save_lane_csv(base.string() + "_centerline.csv", tw.centerline);
  save_lane_csv(base.string() + "_lane_left.csv", tw.lane_left);
  save_lane_csv(base.string() + "_lane_right.csv", tw.lane_right);
  std::ofstream meta(base.string() + ".meta");
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "resolution=%.6f\norigin_x=%.6f\norigin_y=%.6f\n"
                "occupied_threshold=127\ncenterline=%s_centerline.csv\n"
                "lane_left=%s_lane_left.csv\nlane_right=%s_lane_right.csv\n",
                tw.grid.resolution(), tw.grid.origin().x, tw.grid.origin().y,
                spec.name.c_str(), spec.name.c_str(), spec.name.c_str());
  meta << buf;
}

}  // namespace mega
