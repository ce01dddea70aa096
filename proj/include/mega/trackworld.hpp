#pragma once

#include <string>
#include <vector>

#include "mega/grid.hpp"
#include "mega/lane.hpp"

namespace mega {

// Immutable after load; safe to share read-only across concurrent sims.
struct TrackWorld {
  OccupancyGrid grid;
  Lane centerline;
  Lane lane_left;
  Lane lane_right;
};

// Map metadata: plain-text key=value. Required keys: resolution, origin_x,
// origin_y, occupied_threshold, centerline. Optional: lane_left, lane_right
// (CSV paths; derived from the centerline by +/-lane_offset when absent),
// lane_offset (default 0.8), resample_spacing (default 0.1).
TrackWorld load_track(const std::string& map_image_path,
                      const std::string& metadata_path);

// Beams uniformly span [theta - fov/2, theta + fov/2]; beam 0 is the
// rightmost beam. Throws if the pose is inside an occupied cell.
std::vector<double> raycast(const TrackWorld& world, const Vec2& pos,
                            double theta, int n_beams, double fov,
                            double max_range);

Vec2 nearest_boundary_point(const TrackWorld& world, const Vec2& p);

// arc-length coordinate of the closest centerline point, in [0, length)
double progress(const TrackWorld& world, const Vec2& p);

// Lane CSV: header x_m,y_m,speed_mps.
std::vector<Waypoint> load_lane_csv(const std::string& path);
void save_lane_csv(const std::string& path, const Lane& lane);

// Synthetic closed circuits shipped with the project.
struct SynthTrackSpec {
  std::string name = "map1";
  double resolution = 0.1;     // meters per cell
  double half_width = 3.0;     // corridor half-width, meters
  double lane_offset = 0.8;
  double target_speed = 4.0;   // m/s on the centerline
  int shape = 1;               // 1 = rounded rectangle, 2 = two-lobe loop
};

TrackWorld build_synthetic_track(const SynthTrackSpec& spec);

// Writes <name>.pgm, <name>.meta and the three lane CSVs into dir;
// load_track(<name>.pgm, <name>.meta) round-trips the result.
void write_synthetic_track(const SynthTrackSpec& spec, const std::string& dir);

}  // namespace mega
