#pragma once

#include <cstdint>
#include <vector>

#include "mega/trackworld.hpp"
#include "mega/vehicle.hpp"

namespace mega {

enum class Outcome { Running, Overtake, Collision, Timeout };

const char* outcome_name(Outcome o);

struct SimConfig {
  VehicleParams vehicle;
  double physics_dt = 0.01;      // s
  int substeps_per_control = 2;  // control period = 0.02 s
  int max_steps = 5000;          // control steps
  double gap_start = 3.0;        // m, ego starts behind by this
  double overtake_margin = 1.0;  // m of progress lead past the opponent
  double opp_speed_scale = 0.8;  // opponent tracks its lane at this fraction
  int n_beams = 1080;
  double fov = 4.71238898038469;  // 270 deg
  double max_range = 30.0;        // m
};

struct ScanObservation {
  std::vector<double> ranges;  // all in (0, max_range]
  double ego_speed = 0.0;      // carried for scoring, not fed to the network
};

struct EnvState {
  VehicleState ego;
  VehicleState opp;
  int step_index = 0;
  bool done = false;
  Outcome outcome = Outcome::Running;

  // wrap-aware progress bookkeeping for overtake detection
  double s_ego = 0.0, s_opp = 0.0;      // last centerline stations
  double cum_ego = 0.0, cum_opp = 0.0;  // unwrapped progress since reset
  double gap0 = 0.0;                    // initial opponent lead
};

enum class Agent { Ego, Opp };

// Opponent on a seed-chosen lane (even seed = right, odd = left) at a
// seed-chosen station; ego gap_start behind on the centerline; both at
// standstill. All downstream randomness derives from the seed.
EnvState reset(const TrackWorld& world, std::uint64_t seed,
               const SimConfig& cfg);

// which lane the opponent was placed on at reset
bool opponent_on_left(std::uint64_t seed);

// Raycast against the grid plus the other vehicle's footprint rectangle.
ScanObservation observe(const TrackWorld& world, const EnvState& env,
                        Agent who, const SimConfig& cfg);

// Advances both vehicles one control period, then resolves collision /
// overtake / timeout. Throws when called on a done environment.
EnvState step_env(const TrackWorld& world, const EnvState& env,
                  const Action& a_ego, const Action& a_opp,
                  const SimConfig& cfg);

// true when the footprint overlaps any occupied cell
bool footprint_hits_grid(const OccupancyGrid& grid, const OrientedRect& rect);

}  // namespace mega
