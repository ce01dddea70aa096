#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mega/conflict.hpp"
#include "mega/experts.hpp"
#include "mega/policy.hpp"
#include "mega/safety.hpp"

namespace mega {

enum class Mode { Mega, HgFilter, HgPlain, HgRandomTrunc };

Mode mode_from_string(const std::string& s);
const char* mode_name(Mode m);

inline bool mode_filters(Mode m) {
  return m == Mode::Mega || m == Mode::HgFilter;
}

struct RunConfig {
  Mode mode = Mode::Mega;
  int total_rollouts = 200;
  int eval_every = 100;
  std::uint64_t seed = 0;
  SimConfig sim;
  GateConfig gate;
  SafetyConfig safety;
  TrainConfig train;
  double epsilon = 0.99;
  double w_sigma = 1.0;
  double w_speed = 1.0;
  bool warm_start = false;
  double opp_lookahead = 1.2;
  double opp_switch_trigger = 5.0;
  // HgRandomTrunc: cumulative |D| targets per rollout, taken from a paired
  // HgFilter run so both methods see the same demonstration budget
  std::vector<std::size_t> budget_schedule;
};

struct RolloutResult {
  std::vector<Demonstration> demos;
  std::size_t raw_collected = 0;
  Outcome outcome = Outcome::Running;
  bool filter_terminated = false;
  int steps = 0;
};

// One gated episode: the novice drives until the gate hands control to the
// expert; every expert-controlled step is recorded. In filter modes the
// data filter runs online and ends the rollout when sigma goes negative.
RolloutResult run_rollout(const TrackWorld& world, std::uint64_t env_seed,
                          const Policy& novice, ImperfectExpert& expert,
                          const RunConfig& cfg, int rollout_id);

struct MetricsRow {
  int rollout = 0;       // 1-based
  std::size_t d_size = 0;
  std::size_t removed = 0;
  std::size_t replaced = 0;
  double train_loss = 0.0;
  Outcome outcome = Outcome::Running;
};

struct TrainingRun {
  std::vector<std::pair<int, Policy>> checkpoints;  // (rollouts seen, policy)
  std::vector<MetricsRow> metrics;
  Dataset dataset;
  Policy final_policy;
};

// Algorithm loop: experts rotate round-robin, one dominant expert per
// rollout; retrain after each full rotation; checkpoint every eval_every
// rollouts. HG modes use exactly one expert.
TrainingRun run_training(const RunConfig& cfg,
                         const std::vector<ExpertSpec>& experts,
                         const TrackWorld& world);

struct EvalResult {
  double overtake_pct = 0.0;
  double collision_pct = 0.0;
  double timeout_pct = 0.0;
  std::vector<Vec2> collision_points;
};

// n seeded episodes with the policy in full control (no expert, no gate)
EvalResult evaluate_policy(const Policy& policy, const TrackWorld& world,
                           int n, std::uint64_t seed, const RunConfig& cfg);

// same harness with an imperfect expert driving the ego vehicle
EvalResult evaluate_expert(const ExpertSpec& spec, const TrackWorld& world,
                           int n, std::uint64_t seed, const RunConfig& cfg);

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows,
                       std::uint64_t seed);

// Derived expert family: per-expert seeds, optional +/-10% lookahead
// jitter so experts fail in different places.
std::vector<ExpertSpec> make_experts(int m, double pu, double lookahead,
                                     double switch_trigger, bool jitter,
                                     std::uint64_t seed);

}  // namespace mega
