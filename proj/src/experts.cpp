#include "mega/experts.hpp"

#include <cmath>

namespace mega {

Action pure_pursuit(const Lane& lane, const VehicleState& s, double lookahead,
                    double wheelbase) {
  const double sp = lane.project({s.x, s.y});
  const Waypoint target = lane.point_at(sp + lookahead);
  const double dx = target.x - s.x;
  const double dy = target.y - s.y;
  // angle to the lookahead point in the body frame
  const double alpha = wrap_angle(std::atan2(dy, dx) - s.theta);
  const double steering =
      std::atan(2.0 * wheelbase * std::sin(alpha) / lookahead);
  return {steering, target.speed};
}

LaneId assigned_lane(const TrackWorld& world, const Vec2& p) {
  const double dl = world.lane_left.distance_to(p);
  const double dr = world.lane_right.distance_to(p);
  return dl <= dr ? LaneId::Left : LaneId::Right;
}

Action LaneSwitcher::act(const TrackWorld& world, const EnvState& env,
                         Agent who) {
  const VehicleState& self = who == Agent::Ego ? env.ego : env.opp;
  const VehicleState& other = who == Agent::Ego ? env.opp : env.ego;

  const LaneId other_lane = assigned_lane(world, {other.x, other.y});
  if (other_lane == lane_) {
    const double L = world.centerline.length();
    const double s_self = progress(world, {self.x, self.y});
    const double s_other = progress(world, {other.x, other.y});
    const double ahead = world.centerline.wrap_s(s_other - s_self);
    // blocked only when the other vehicle is ahead, within the trigger range
    if (ahead > 0.0 && ahead <= trigger_ && ahead < 0.5 * L)
      lane_ = lane_ == LaneId::Left ? LaneId::Right : LaneId::Left;
  }
  return pure_pursuit(lane_of(world, lane_), self, lookahead_, wheelbase_);
}

}  // namespace mega
