#include <doctest.h>

#include <cmath>

#include "mega/experts.hpp"
#include "test_helpers.hpp"

using namespace mega;

TEST_CASE("pure pursuit steers toward a laterally offset target") {
  TrackWorld w = test::make_square_world();
  // on the bottom straight, facing +x; the left lane is 0.8 m to the left
  VehicleState s{4.0, 2.0, 0.0, 3.0, 0.0};
  const Action left = pure_pursuit(w.lane_left, s, 1.2, 0.33);
  const Action right = pure_pursuit(w.lane_right, s, 1.2, 0.33);
  CHECK(left.steering > 0.05);
  CHECK(right.steering < -0.05);
  // already centered on the lane: near-zero steering
  VehicleState on{4.0, 2.8, 0.0, 3.0, 0.0};
  const Action straight = pure_pursuit(w.lane_left, on, 1.2, 0.33);
  CHECK(std::abs(straight.steering) < 0.05);
  CHECK(straight.speed == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("pure pursuit steering matches the geometric formula") {
  TrackWorld w = test::make_square_world();
  const VehicleState s{4.0, 2.3, 0.1, 3.0, 0.0};
  const double L = 0.33, ld = 1.2;
  const Action a = pure_pursuit(w.lane_left, s, ld, L);
  // recompute from the lane's own lookahead target
  const double s_proj = w.lane_left.project({s.x, s.y});
  const auto tgt = w.lane_left.point_at(w.lane_left.wrap_s(s_proj + ld));
  const double alpha =
      wrap_angle(std::atan2(tgt.y - s.y, tgt.x - s.x) - s.theta);
  const double want = std::atan(2.0 * L * std::sin(alpha) / ld);
  CHECK(a.steering == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("assigned_lane picks the nearer lane") {
  TrackWorld w = test::make_square_world();
  // bottom straight: left lane is at y ~ 2.8, right lane at y ~ 1.2
  CHECK(assigned_lane(w, {5.0, 2.7}) == LaneId::Left);
  CHECK(assigned_lane(w, {5.0, 1.3}) == LaneId::Right);
}

TEST_CASE("lane switcher changes lanes only when blocked ahead") {
  TrackWorld w = test::make_square_world();
  SimConfig cfg;
  LaneSwitcher planner(LaneId::Left, 1.2, 5.0, cfg.vehicle.wheelbase);

  EnvState env;
  env.ego = {4.0, 2.8, 0.0, 3.0, 0.0};  // on the left lane, heading +x

  SUBCASE("opponent on the other lane: no switch") {
    env.opp = {6.0, 1.2, 0.0, 0.0, 0.0};
    planner.act(w, env, Agent::Ego);
    CHECK(planner.current_lane() == LaneId::Left);
  }
  SUBCASE("opponent on my lane but too far ahead: no switch") {
    env.opp = {4.0 + 7.0, 2.8, 0.0, 0.0, 0.0};  // 7 m > trigger
    planner.act(w, env, Agent::Ego);
    CHECK(planner.current_lane() == LaneId::Left);
  }
  SUBCASE("opponent on my lane within the trigger distance: switch") {
    env.opp = {4.0 + 3.0, 2.8, 0.0, 0.0, 0.0};
    planner.act(w, env, Agent::Ego);
    CHECK(planner.current_lane() == LaneId::Right);
  }
  SUBCASE("opponent behind on my lane: no switch") {
    env.opp = {2.5, 2.8, 0.0, 0.0, 0.0};
    planner.act(w, env, Agent::Ego);
    CHECK(planner.current_lane() == LaneId::Left);
  }
}

TEST_CASE("imperfect expert reverses steering at the configured rate") {
  TrackWorld w = test::make_square_world();
  EnvState env;
  env.ego = {4.0, 2.0, 0.0, 3.0, 0.0};  // off-lane so steering is nonzero
  env.opp = {8.0, 8.0, 0.0, 0.0, 0.0};

  auto flip_rate = [&](double pu, std::uint64_t seed) {
    ExpertSpec spec;
    spec.pu = pu;
    spec.seed = seed;
    ImperfectExpert expert(spec, LaneId::Left, 0.33);
    LaneSwitcher clean(LaneId::Left, spec.lookahead, spec.switch_trigger, 0.33);
    int flips = 0;
    const int n = 4000;
    for (int k = 0; k < n; ++k) {
      const Action noisy = expert.act(w, env, Agent::Ego);
      const Action ref = clean.act(w, env, Agent::Ego);
      if (noisy.steering == -ref.steering && ref.steering != 0.0) ++flips;
      CHECK(noisy.speed == ref.speed);
    }
    return static_cast<double>(flips) / n;
  };

  CHECK(flip_rate(0.0, 1) == doctest::Approx(0.0));
  CHECK(flip_rate(1.0, 2) == doctest::Approx(1.0));
  CHECK(flip_rate(0.3, 3) == doctest::Approx(0.3).epsilon(0.1));
}

TEST_CASE("imperfect expert is deterministic in its seed") {
  TrackWorld w = test::make_square_world();
  EnvState env;
  env.ego = {4.0, 2.0, 0.0, 3.0, 0.0};
  env.opp = {8.0, 8.0, 0.0, 0.0, 0.0};
  ExpertSpec spec;
  spec.pu = 0.5;
  spec.seed = 99;
  ImperfectExpert a(spec, LaneId::Left, 0.33);
  ImperfectExpert b(spec, LaneId::Left, 0.33);
  for (int k = 0; k < 200; ++k)
    CHECK(a.act(w, env, Agent::Ego).steering ==
          b.act(w, env, Agent::Ego).steering);
}

TEST_CASE("gate hysteresis sequence") {
  GateConfig cfg;  // take 0.9, release 1.5, n_safe 25
  Gate gate(cfg);
  CHECK(!gate.update(2.0));           // novice driving in the clear
  CHECK(!gate.update(1.0));           // between thresholds: still novice
  CHECK(gate.update(0.8));            // breach: expert takes over
  CHECK(gate.update(2.0));            // 1 safe step, still expert
  for (int k = 0; k < 23; ++k) CHECK(gate.update(2.0));  // 24 safe steps
  CHECK(!gate.update(2.0));           // 25th safe step: handback
  CHECK(!gate.update(1.0));
}

TEST_CASE("gate safe-step counter resets on a dip below release") {
  GateConfig cfg;
  Gate gate(cfg);
  gate.update(0.5);  // expert takes over
  for (int k = 0; k < 20; ++k) CHECK(gate.update(2.0));
  CHECK(gate.update(1.2));  // dip below d_release resets the counter
  for (int k = 0; k < 24; ++k) CHECK(gate.update(2.0));
  CHECK(!gate.update(2.0));
}

TEST_CASE("gate does not retake between the two thresholds") {
  GateConfig cfg;
  Gate gate(cfg);
  for (int k = 0; k < 100; ++k) CHECK(!gate.update(1.1));
}
