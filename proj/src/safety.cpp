#include "mega/safety.hpp"

#include <algorithm>
#include <stdexcept>

#include "mega/rng.hpp"

namespace mega {

Vec2 obstacle_point(const TrackWorld& world, const EnvState& env,
                    const SafetyConfig& cfg) {
  const Vec2 ego{env.ego.x, env.ego.y};
  const Vec2 opp{env.opp.x, env.opp.y};
  const Vec2 wall = nearest_boundary_point(world, ego);
  const double h_opp = cbf_value(ego, opp, cfg.alpha, cfg.literal_eq3);
  const double h_wall = cbf_value(ego, wall, cfg.alpha, cfg.literal_eq3);
  return h_wall < h_opp ? wall : opp;
}

double barrier_at(const TrackWorld& world, const EnvState& env,
                  const SafetyConfig& cfg) {
  const Vec2 ego{env.ego.x, env.ego.y};
  return cbf_value(ego, obstacle_point(world, env, cfg), cfg.alpha,
                   cfg.literal_eq3);
}

std::pair<std::vector<Demonstration>, bool> data_filter(
    const std::vector<Demonstration>& segment, const SafetyConfig& cfg) {
  for (std::size_t t = 0; t < segment.size(); ++t) {
    if (segment[t].sigma < 0.0) {
      const std::size_t cut =
          t >= static_cast<std::size_t>(cfg.beta) ? t - cfg.beta : 0;
      return {{segment.begin(), segment.begin() + cut}, true};
    }
  }
  return {segment, false};
}

std::vector<Demonstration> random_truncate(
    const std::vector<Demonstration>& segment, std::size_t target_count,
    std::uint64_t seed) {
  if (target_count > segment.size())
    throw std::invalid_argument("random_truncate: target_count > segment size");
  const std::size_t n = segment.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  // partial Fisher-Yates picks target_count indices uniformly
  for (std::size_t i = 0; i < target_count; ++i) {
    const std::size_t j = i + rng.uniform_int(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(target_count);
  std::sort(idx.begin(), idx.end());
  std::vector<Demonstration> out;
  out.reserve(target_count);
  for (const auto i : idx) out.push_back(segment[i]);
  return out;
}

}  // namespace mega
