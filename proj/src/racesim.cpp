#include "mega/racesim.hpp"

#include <cmath>
#include <stdexcept>

#include "mega/rng.hpp"

namespace mega {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Running: return "running";
    case Outcome::Overtake: return "overtake";
    case Outcome::Collision: return "collision";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

bool opponent_on_left(std::uint64_t seed) { return (seed & 1) != 0; }

EnvState reset(const TrackWorld& world, std::uint64_t seed,
               const SimConfig& cfg) {
  Rng rng(Rng::derive(seed, 0xE57));
  const Lane& lane = opponent_on_left(seed) ? world.lane_left : world.lane_right;

  EnvState env;
  const double su = rng.uniform() * lane.length();
  const Waypoint op = lane.point_at(su);
  env.opp = {op.x, op.y, lane.heading_at(su), 0.0, 0.0};
  env.s_opp = progress(world, {op.x, op.y});

  const double se = world.centerline.wrap_s(env.s_opp - cfg.gap_start);
  const Waypoint ep = world.centerline.point_at(se);
  env.ego = {ep.x, ep.y, world.centerline.heading_at(se), 0.0, 0.0};
  env.s_ego = progress(world, {ep.x, ep.y});

  // opponent lead, as a wrapped positive gap
  env.gap0 = world.centerline.wrap_s(env.s_opp - env.s_ego);
  return env;
}

ScanObservation observe(const TrackWorld& world, const EnvState& env,
                        Agent who, const SimConfig& cfg) {
  const VehicleState& self = who == Agent::Ego ? env.ego : env.opp;
  const VehicleState& other = who == Agent::Ego ? env.opp : env.ego;
  const OrientedRect other_rect = footprint(other, cfg.vehicle);

  ScanObservation obs;
  obs.ego_speed = self.v;
  obs.ranges.resize(cfg.n_beams);
  const Vec2 pos{self.x, self.y};
  for (int i = 0; i < cfg.n_beams; ++i) {
    const double a = cfg.n_beams == 1
                         ? self.theta
                         : self.theta - 0.5 * cfg.fov +
                               cfg.fov * static_cast<double>(i) /
                                   (cfg.n_beams - 1);
    double r = world.grid.raycast(pos, a, cfg.max_range);
    const double rv =
        ray_rect_distance(pos, {std::cos(a), std::sin(a)}, other_rect);
    if (rv < r) r = rv;
    obs.ranges[i] = std::max(r, 1e-6);
  }
  return obs;
}

bool footprint_hits_grid(const OccupancyGrid& grid, const OrientedRect& rect) {
  const auto c = rect.corners();
  if (grid.occupied_at(rect.center)) return true;
  const double spacing = 0.5 * grid.resolution();
  for (int e = 0; e < 4; ++e) {
    const Vec2 a = c[e];
    const Vec2 b = c[(e + 1) % 4];
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / n;
      if (grid.occupied_at(a + (b - a) * t)) return true;
    }
  }
  return false;
}

EnvState step_env(const TrackWorld& world, const EnvState& env,
                  const Action& a_ego, const Action& a_opp,
                  const SimConfig& cfg) {
  if (env.done) throw std::runtime_error("step_env: environment is done");

  EnvState n = env;
  const Action ae = saturate(a_ego, cfg.vehicle);
  const Action ao = saturate(a_opp, cfg.vehicle);
  for (int k = 0; k < cfg.substeps_per_control; ++k) {
    n.ego = step_dynamics(n.ego, ae, cfg.vehicle, cfg.physics_dt);
    n.opp = step_dynamics(n.opp, ao, cfg.vehicle, cfg.physics_dt);
  }
  n.step_index += 1;

  // unwrapped progress
  const double L = world.centerline.length();
  auto advance = [&](double prev_s, double& cum, const VehicleState& s) {
    const double cur = progress(world, {s.x, s.y});
    double d = cur - prev_s;
    if (d > 0.5 * L) d -= L;
    if (d < -0.5 * L) d += L;
    cum += d;
    return cur;
  };
  n.s_ego = advance(env.s_ego, n.cum_ego, n.ego);
  n.s_opp = advance(env.s_opp, n.cum_opp, n.opp);

  const OrientedRect ego_rect = footprint(n.ego, cfg.vehicle);
  const OrientedRect opp_rect = footprint(n.opp, cfg.vehicle);
  if (rects_overlap(ego_rect, opp_rect) ||
      footprint_hits_grid(world.grid, ego_rect)) {
    n.done = true;
    n.outcome = Outcome::Collision;
  } else if (n.cum_ego - n.cum_opp >= n.gap0 + cfg.overtake_margin) {
    n.done = true;
    n.outcome = Outcome::Overtake;
  } else if (n.step_index >= cfg.max_steps) {
    n.done = true;
    n.outcome = Outcome::Timeout;
  }
  return n;
}

}  // namespace mega
