#pragma once

#include <cstdint>

#include "mega/racesim.hpp"
#include "mega/rng.hpp"

namespace mega {

struct ExpertSpec {
  double pu = 0.0;            // probability of a reversed steering command
  std::uint64_t seed = 0;
  double lookahead = 1.2;     // m
  double switch_trigger = 5.0;  // m; blocked-lane distance that forces a switch
  int expert_id = 1;
};

struct GateConfig {
  double d_take = 0.9;    // m, min clearance below which the expert takes over
  double d_release = 1.5; // m
  int n_safe = 25;        // consecutive safe steps before handback
};

enum class LaneId { Left, Right };

inline const Lane& lane_of(const TrackWorld& w, LaneId id) {
  return id == LaneId::Left ? w.lane_left : w.lane_right;
}

// Geometric pure pursuit: steer toward the point `lookahead` meters ahead
// along the lane; command that point's target speed.
Action pure_pursuit(const Lane& lane, const VehicleState& s, double lookahead,
                    double wheelbase);

// a vehicle is "on" the lane whose nearest waypoint is closer
LaneId assigned_lane(const TrackWorld& world, const Vec2& p);

// Lane-switcher planner. Tracks one lane with pure pursuit; switches to
// the other lane when the opposing vehicle occupies the current lane
// within switch_trigger meters ahead.
class LaneSwitcher {
 public:
  LaneSwitcher(LaneId start, double lookahead, double switch_trigger,
               double wheelbase)
      : lane_(start), lookahead_(lookahead), trigger_(switch_trigger),
        wheelbase_(wheelbase) {}

  Action act(const TrackWorld& world, const EnvState& env, Agent who);
  LaneId current_lane() const { return lane_; }
  void set_lane(LaneId id) { lane_ = id; }

 private:
  LaneId lane_;
  double lookahead_;
  double trigger_;
  double wheelbase_;
};

// Lane switcher that reverses the steering angle with probability pu,
// one Bernoulli draw per control step while it holds control.
class ImperfectExpert {
 public:
  ImperfectExpert(const ExpertSpec& spec, LaneId start, double wheelbase)
      : spec_(spec), rng_(spec.seed),
        planner_(start, spec.lookahead, spec.switch_trigger, wheelbase) {}

  Action act(const TrackWorld& world, const EnvState& env, Agent who) {
    Action a = planner_.act(world, env, who);
    if (rng_.bernoulli(spec_.pu)) a.steering = -a.steering;
    return a;
  }

  const ExpertSpec& spec() const { return spec_; }
  LaneSwitcher& planner() { return planner_; }

 private:
  ExpertSpec spec_;
  Rng rng_;
  LaneSwitcher planner_;
};

// Min-clearance hysteresis gate. The expert takes over when the novice
// gets closer than d_take to anything; control is handed back after
// n_safe consecutive steps with clearance above d_release.
class Gate {
 public:
  explicit Gate(const GateConfig& cfg) : cfg_(cfg) {}

  // feed the current min scan range; returns true while the expert holds
  bool update(double min_range) {
    if (!expert_holds_) {
      if (min_range < cfg_.d_take) {
        expert_holds_ = true;
        safe_count_ = 0;
      }
    } else {
      if (min_range > cfg_.d_release) {
        if (++safe_count_ >= cfg_.n_safe) {
          expert_holds_ = false;
          safe_count_ = 0;
        }
      } else {
        safe_count_ = 0;
      }
    }
    return expert_holds_;
  }

  bool expert_holds() const { return expert_holds_; }

 private:
  GateConfig cfg_;
  bool expert_holds_ = false;
  int safe_count_ = 0;
};

}  // namespace mega
