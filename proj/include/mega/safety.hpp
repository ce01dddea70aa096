#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mega/dataset.hpp"
#include "mega/racesim.hpp"

namespace mega {

struct SafetyConfig {
  double alpha = 0.6;  // minimal safe distance, m
  double gamma = 0.2;  // in (0, 1]
  int beta = 20;       // back-truncation depth, control steps
  bool literal_eq3 = false;
};

// Barrier value for an ego/obstacle point pair. Default is the squared
// distance form dx^2 + dy^2 - alpha^2; literal=true flips the sign of the
// dy^2 term (kept for study; it is unbounded below for lateral offsets).
inline double cbf_value(const Vec2& ego, const Vec2& obstacle, double alpha,
                        bool literal = false) {
  const double dx = ego.x - obstacle.x;
  const double dy = ego.y - obstacle.y;
  return literal ? dx * dx - dy * dy - alpha * alpha
                 : dx * dx + dy * dy - alpha * alpha;
}

// Whichever of {opponent center, nearest boundary point} gives the smaller
// barrier value; ties go to the opponent.
Vec2 obstacle_point(const TrackWorld& world, const EnvState& env,
                    const SafetyConfig& cfg);

double barrier_at(const TrackWorld& world, const EnvState& env,
                  const SafetyConfig& cfg);

inline double safety_score(double h_next, double h_curr, double gamma) {
  return h_next - (1.0 - gamma) * h_curr;
}

// Scan forward; at the first index t with sigma < 0 drop [max(0, t-beta), t]
// and everything after. Returns the kept prefix and whether the rollout
// should terminate.
std::pair<std::vector<Demonstration>, bool> data_filter(
    const std::vector<Demonstration>& segment, const SafetyConfig& cfg);

// Uniformly random subset of size target_count, order preserved.
std::vector<Demonstration> random_truncate(
    const std::vector<Demonstration>& segment, std::size_t target_count,
    std::uint64_t seed);

inline double removal_ratio(std::size_t all_collected, std::size_t kept) {
  if (all_collected == 0)
    throw std::invalid_argument("removal_ratio: zero collected");
  return 1.0 - static_cast<double>(kept) / static_cast<double>(all_collected);
}

}  // namespace mega
