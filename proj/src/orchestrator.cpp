#include "mega/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>

namespace mega {

Mode mode_from_string(const std::string& s) {
  if (s == "mega") return Mode::Mega;
  if (s == "hg_filter") return Mode::HgFilter;
  if (s == "hg_plain") return Mode::HgPlain;
  if (s == "hg_random_trunc") return Mode::HgRandomTrunc;
  throw std::invalid_argument("unknown mode: " + s);
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Mega: return "mega";
    case Mode::HgFilter: return "hg_filter";
    case Mode::HgPlain: return "hg_plain";
    case Mode::HgRandomTrunc: return "hg_random_trunc";
  }
  return "?";
}

namespace {

LaneId opposite(LaneId id) {
  return id == LaneId::Left ? LaneId::Right : LaneId::Left;
}

double min_range(const ScanObservation& obs) {
  return *std::min_element(obs.ranges.begin(), obs.ranges.end());
}

}  // namespace

RolloutResult run_rollout(const TrackWorld& world, std::uint64_t env_seed,
                          const Policy& novice, ImperfectExpert& expert,
                          const RunConfig& cfg, int rollout_id) {
  RolloutResult out;
  EnvState env = reset(world, env_seed, cfg.sim);

  const LaneId opp_lane =
      opponent_on_left(env_seed) ? LaneId::Left : LaneId::Right;
  LaneSwitcher opp_planner(opp_lane, cfg.opp_lookahead, cfg.opp_switch_trigger,
                           cfg.sim.vehicle.wheelbase);
  expert.planner().set_lane(opposite(opp_lane));

  Gate gate(cfg.gate);
  const bool filtering = mode_filters(cfg.mode);

  std::vector<Demonstration> segment;
  double pending_h = 0.0;
  bool pending = false;

  auto close_segment = [&](bool& terminated) {
    terminated = false;
    if (segment.empty()) return;
    if (filtering) {
      auto [kept, term] = data_filter(segment, cfg.safety);
      out.demos.insert(out.demos.end(), kept.begin(), kept.end());
      terminated = term;
    } else {
      out.demos.insert(out.demos.end(), segment.begin(), segment.end());
    }
    segment.clear();
  };

  while (!env.done) {
    const ScanObservation obs = observe(world, env, Agent::Ego, cfg.sim);
    const bool expert_holds = gate.update(min_range(obs));

    if (!expert_holds && !segment.empty()) {
      bool term = false;
      close_segment(term);
      if (term) {
        out.filter_terminated = true;
        break;
      }
    }

    Action a_ego;
    const auto ds = downsample(obs.ranges, cfg.sim.max_range);
    if (expert_holds) {
      a_ego = saturate(expert.act(world, env, Agent::Ego), cfg.sim.vehicle);
      Demonstration d;
      d.obs = ds;
      d.action = a_ego;
      d.v = env.ego.v;
      d.expert_id = expert.spec().expert_id;
      d.rollout_id = rollout_id;
      d.step_index = env.step_index;
      segment.push_back(d);
      ++out.raw_collected;
      pending_h = barrier_at(world, env, cfg.safety);
      pending = true;
    } else {
      a_ego = novice.act(ds, cfg.sim.vehicle);
    }

    Action a_opp = opp_planner.act(world, env, Agent::Opp);
    a_opp.speed *= cfg.sim.opp_speed_scale;

    env = step_env(world, env, a_ego, a_opp, cfg.sim);

    if (pending) {
      const double h_next = barrier_at(world, env, cfg.safety);
      segment.back().sigma =
          safety_score(h_next, pending_h, cfg.safety.gamma);
      pending = false;
      if (filtering && segment.back().sigma < 0.0) {
        bool term = false;
        close_segment(term);
        out.filter_terminated = true;
        break;
      }
    }
  }

  if (!segment.empty()) {
    // a segment cut short by episode termination; its last record already
    // carries a finalized sigma (the post-step state always exists)
    bool term = false;
    close_segment(term);
    out.filter_terminated = out.filter_terminated || term;
  }
  out.outcome = env.outcome;
  out.steps = env.step_index;
  return out;
}

TrainingRun run_training(const RunConfig& cfg,
                         const std::vector<ExpertSpec>& experts,
                         const TrackWorld& world) {
  if (experts.empty()) throw std::invalid_argument("run_training: no experts");
  if (cfg.mode != Mode::Mega && experts.size() != 1)
    throw std::invalid_argument("run_training: HG modes use exactly one expert");

  const int m = static_cast<int>(experts.size());
  TrainingRun run;
  Policy policy = Policy::init(Rng::derive(cfg.seed, 0x9010));
  double last_loss = 0.0;

  for (int r = 0; r < cfg.total_rollouts; ++r) {
    const ExpertSpec& base = experts[r % m];
    ExpertSpec spec = base;
    // fresh reversal stream each rollout, deterministic in (expert, rollout)
    spec.seed = Rng::derive(base.seed, static_cast<std::uint64_t>(r) + 1);
    ImperfectExpert expert(spec, LaneId::Right, cfg.sim.vehicle.wheelbase);

    const std::uint64_t env_seed =
        Rng::derive(cfg.seed, 0xE0000 + static_cast<std::uint64_t>(r));
    RolloutResult rr = run_rollout(world, env_seed, policy, expert, cfg, r);

    std::size_t removed = rr.raw_collected - rr.demos.size();
    std::size_t replaced = 0;
    std::vector<Demonstration> demos = std::move(rr.demos);

    if (cfg.mode == Mode::HgRandomTrunc) {
      std::size_t keep = demos.size();
      if (static_cast<std::size_t>(r) < cfg.budget_schedule.size()) {
        const std::size_t target = cfg.budget_schedule[r];
        const std::size_t have = run.dataset.size();
        keep = target > have ? std::min(demos.size(), target - have) : 0;
      }
      demos = random_truncate(
          demos, keep,
          Rng::derive(cfg.seed, 0x47000 + static_cast<std::uint64_t>(r)));
      removed = rr.raw_collected - demos.size();
    } else if (cfg.mode == Mode::Mega) {
      const ResolveStats st =
          resolve_conflicts(demos, run.dataset, cfg.epsilon, cfg.w_sigma,
                            cfg.w_speed);
      replaced = st.labels_replaced;
    }

    run.dataset.insert(run.dataset.end(), demos.begin(), demos.end());

    if ((r + 1) % m == 0) {
      if (run.dataset.empty()) {
        std::cerr << "warning: empty dataset at rollout " << (r + 1)
                  << ", skipping training\n";
      } else {
        const int iteration = (r + 1) / m;
        TrainConfig tc = cfg.train;
        tc.seed = Rng::derive(cfg.seed ^ cfg.train.seed,
                              0x50000 + static_cast<std::uint64_t>(iteration));
        const Policy p0 =
            cfg.warm_start
                ? policy
                : Policy::init(Rng::derive(
                      cfg.seed, 0x30000 + static_cast<std::uint64_t>(iteration)));
        TrainResult tr = train(p0, run.dataset, tc, cfg.sim.vehicle);
        policy = tr.policy;
        last_loss = tr.final_loss;
      }
    }

    run.metrics.push_back({r + 1, run.dataset.size(), removed, replaced,
                           last_loss, rr.outcome});
    if (cfg.eval_every > 0 && (r + 1) % cfg.eval_every == 0)
      run.checkpoints.emplace_back(r + 1, policy);
  }
  run.final_policy = policy;
  return run;
}

namespace {

using Driver = std::function<Action(const TrackWorld&, const EnvState&,
                                    const ScanObservation&)>;

EvalResult evaluate_driver(const TrackWorld& world, int n, std::uint64_t seed,
                           const RunConfig& cfg,
                           const std::function<Driver(std::uint64_t)>& make) {
  if (n < 1) throw std::invalid_argument("evaluate: n < 1");
  EvalResult res;
  int overtakes = 0, collisions = 0, timeouts = 0;
  for (int k = 0; k < n; ++k) {
    const std::uint64_t ep_seed =
        Rng::derive(seed, 0xEE000 + static_cast<std::uint64_t>(k));
    EnvState env = reset(world, ep_seed, cfg.sim);
    const LaneId opp_lane =
        opponent_on_left(ep_seed) ? LaneId::Left : LaneId::Right;
    LaneSwitcher opp_planner(opp_lane, cfg.opp_lookahead,
                             cfg.opp_switch_trigger, cfg.sim.vehicle.wheelbase);
    Driver drive = make(ep_seed);
    while (!env.done) {
      const ScanObservation obs = observe(world, env, Agent::Ego, cfg.sim);
      const Action a_ego = drive(world, env, obs);
      Action a_opp = opp_planner.act(world, env, Agent::Opp);
      a_opp.speed *= cfg.sim.opp_speed_scale;
      env = step_env(world, env, a_ego, a_opp, cfg.sim);
    }
    switch (env.outcome) {
      case Outcome::Overtake: ++overtakes; break;
      case Outcome::Collision:
        ++collisions;
        res.collision_points.push_back({env.ego.x, env.ego.y});
        break;
      default: ++timeouts; break;
    }
  }
  res.overtake_pct = static_cast<double>(overtakes) / n;
  res.collision_pct = static_cast<double>(collisions) / n;
  res.timeout_pct = static_cast<double>(timeouts) / n;
  return res;
}

}  // namespace

EvalResult evaluate_policy(const Policy& policy, const TrackWorld& world,
                           int n, std::uint64_t seed, const RunConfig& cfg) {
  return evaluate_driver(
      world, n, seed, cfg, [&](std::uint64_t) -> Driver {
        return [&policy, &cfg](const TrackWorld&, const EnvState&,
                               const ScanObservation& obs) {
          return policy.act(downsample(obs.ranges, cfg.sim.max_range),
                            cfg.sim.vehicle);
        };
      });
}

EvalResult evaluate_expert(const ExpertSpec& spec, const TrackWorld& world,
                           int n, std::uint64_t seed, const RunConfig& cfg) {
  return evaluate_driver(
      world, n, seed, cfg, [&](std::uint64_t ep_seed) -> Driver {
        ExpertSpec s = spec;
        s.seed = Rng::derive(spec.seed, ep_seed);
        auto ex = std::make_shared<ImperfectExpert>(s, LaneId::Right,
                                                    cfg.sim.vehicle.wheelbase);
        return [ex](const TrackWorld& w, const EnvState& env,
                    const ScanObservation&) {
          return ex->act(w, env, Agent::Ego);
        };
      });
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows,
                       std::uint64_t seed) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write metrics: " + path);
  f << "# megadagger v1 seed=" << seed << "\n";
  f << "rollout,dataset_size,removed,replaced,train_loss,outcome\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%zu,%zu,%zu,%.9g,%s\n", r.rollout,
                  r.d_size, r.removed, r.replaced, r.train_loss,
                  outcome_name(r.outcome));
    f << buf;
  }
}

std::vector<ExpertSpec> make_experts(int m, double pu, double lookahead,
                                     double switch_trigger, bool jitter,
                                     std::uint64_t seed) {
  std::vector<ExpertSpec> specs;
  for (int k = 0; k < m; ++k) {
    ExpertSpec s;
    s.pu = pu;
    s.seed = Rng::derive(seed, 0xA0 + static_cast<std::uint64_t>(k));
    s.lookahead = lookahead;
    s.switch_trigger = switch_trigger;
    s.expert_id = k + 1;
    if (jitter && m > 1) {
      Rng rng(Rng::derive(s.seed, 0x11));
      s.lookahead = lookahead * (1.0 + rng.uniform(-0.1, 0.1));
    }
    specs.push_back(s);
  }
  return specs;
}

}  // namespace mega
