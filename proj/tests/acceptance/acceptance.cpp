// Acceptance gate. Each criterion prints exactly one PASS/FAIL line and
// the process exit code reflects it. Invoked per criterion from ctest:
//   acceptance <criterion-id> <cli-binary> <work-dir>
// Heavy training artifacts are cached under <work-dir> so criteria that
// share a harness (7 and 8) do not repeat work.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mega/config.hpp"
#include "mega/orchestrator.hpp"
#include "mega/recipes.hpp"

using namespace mega;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_work;

struct Verdict {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- helpers

TrackWorld shipped_map(int shape) {
  SynthTrackSpec spec;
  spec.name = shape == 1 ? "map1" : "map2";
  spec.shape = shape;
  return build_synthetic_track(spec);
}

Dataset random_dataset(int n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (int k = 0; k < n; ++k) {
    Demonstration demo;
    for (auto& x : demo.obs) x = rng.uniform(0.05, 1.0);
    demo.action = {rng.uniform(-0.4, 0.4), rng.uniform(0.5, 7.5)};
    d.push_back(demo);
  }
  return d;
}

RunConfig base_run(Mode mode, int rollouts, std::uint64_t seed) {
  Config c;
  RunConfig rc = c.make_run_config();
  rc.mode = mode;
  rc.total_rollouts = rollouts;
  rc.seed = seed;
  rc.train.seed = seed;
  return rc;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ------------------------------------------------- 1: gradient correctness

Verdict criterion_gradient() {
  VehicleParams vp;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Policy p = Policy::init(Rng::derive(1000, k));
    const Dataset d = random_dataset(8 + k % 8, 2000 + k);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(d.size()), kObsDim), T(d.size(), 2);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      for (int c = 0; c < kObsDim; ++c) X(r, c) = d[r].obs[c];
      T.row(r) = action_to_target(d[r].action, vp).transpose();
    }
    worst = std::max(worst, gradient_check(p, X, T, 10, 3000 + k));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "max relative gradient error %.3g (threshold 1e-4)", worst);
  return {worst < 1e-4, buf};
}

// ------------------------------------------- 2: raycast oracle equivalence

// Length of the ray segment inside the grid cell entered at distance t0.
double chord_in_hit_cell(const OccupancyGrid& g, const Vec2& p, double angle,
                         double t0) {
  const Vec2 dir{std::cos(angle), std::sin(angle)};
  const Vec2 q{p.x + dir.x * (t0 + 1e-9), p.y + dir.y * (t0 + 1e-9)};
  int i, j;
  g.cell_of(q, i, j);
  const Vec2 c = g.cell_center(i, j);
  const double h = g.resolution() / 2.0;
  double t_exit = 1e300;
  if (dir.x > 1e-15) t_exit = std::min(t_exit, (c.x + h - p.x) / dir.x);
  if (dir.x < -1e-15) t_exit = std::min(t_exit, (c.x - h - p.x) / dir.x);
  if (dir.y > 1e-15) t_exit = std::min(t_exit, (c.y + h - p.y) / dir.y);
  if (dir.y < -1e-15) t_exit = std::min(t_exit, (c.y - h - p.y) / dir.y);
  return t_exit - t0;
}

Verdict criterion_raycast() {
  double worst = 0.0;
  int tested = 0, grazes = 0;
  for (int shape : {1, 2}) {
    const TrackWorld w = shipped_map(shape);
    const auto& g = w.grid;
    const double step = g.resolution() / 10.0;
    Rng rng(Rng::derive(555, shape));
    const double x1 = g.origin().x + g.width() * g.resolution();
    const double y1 = g.origin().y + g.height() * g.resolution();
    int done = 0;
    while (done < 500) {
      const Vec2 p{rng.uniform(g.origin().x, x1), rng.uniform(g.origin().y, y1)};
      if (g.occupied_at(p)) continue;
      const double a = rng.uniform(-M_PI, M_PI);
      const double dda = g.raycast(p, a, 30.0);
      const double oracle = g.raycast_marching(p, a, 30.0, step);
      const double diff = std::abs(dda - oracle);
      // The exact traversal sees corner grazes whose chord through the hit
      // cell is shorter than the marching step; the fixed-step oracle
      // cannot resolve those, so they are checked for consistency (the
      // exact hit must come first) instead of by distance.
      if (diff > 0.1 && oracle > dda &&
          chord_in_hit_cell(g, p, a, dda) <= step) {
        ++grazes;
      } else {
        worst = std::max(worst, diff);
      }
      ++done;
      ++tested;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d poses, max |dda - marching| = %.4f m (limit 0.1 m), "
                "%d sub-step corner grazes verified geometrically",
                tested, worst, grazes);
  return {worst <= 0.1, buf};
}

// ------------------------------------------------------ 3: filter semantics

Verdict criterion_filter() {
  Rng rng(777);
  int sequences = 0;
  for (int trial = 0; trial < 200; ++trial) {
    SafetyConfig cfg;
    cfg.beta = static_cast<int>(rng.uniform_int(130));
    const int n = 1 + static_cast<int>(rng.uniform_int(250));
    std::vector<Demonstration> seg;
    for (int k = 0; k < n; ++k) {
      Demonstration d;
      d.sigma = rng.uniform(-0.3, 1.0);
      d.step_index = k;
      seg.push_back(d);
    }
    // index-rule oracle
    std::size_t cut = seg.size();
    bool term = false;
    for (std::size_t t = 0; t < seg.size(); ++t)
      if (seg[t].sigma < 0.0) {
        cut = t >= static_cast<std::size_t>(cfg.beta) ? t - cfg.beta : 0;
        term = true;
        break;
      }
    const auto [kept, got_term] = data_filter(seg, cfg);
    if (got_term != term || kept.size() != cut)
      return {false, "mismatch on sequence " + std::to_string(trial)};
    for (std::size_t k = 0; k < kept.size(); ++k) {
      if (kept[k].step_index != seg[k].step_index)
        return {false, "reordered output on sequence " + std::to_string(trial)};
      if (kept[k].sigma < 0.0)
        return {false, "retained negative safety score on sequence " +
                           std::to_string(trial)};
    }
    ++sequences;
  }
  return {true, std::to_string(sequences) +
                    " sequences match the index-rule oracle exactly"};
}

// ------------------------------------------- 4: conflict-resolution oracle

struct OMember {
  bool global;
  std::size_t idx;
};

double ocos(const std::array<double, kObsDim>& a,
            const std::array<double, kObsDim>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (int k = 0; k < kObsDim; ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

void oracle_resolve(Dataset& d_new, Dataset& d_global, double eps) {
  std::vector<std::size_t> order(d_new.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d_new[a].step_index < d_new[b].step_index;
  });
  struct Group {
    std::vector<OMember> members;
    OMember winner;
  };
  auto earlier = [](const Demonstration& a, bool ag, std::size_t ai,
                    const Demonstration& b, bool bg, std::size_t bi) {
    if (a.rollout_id != b.rollout_id) return a.rollout_id < b.rollout_id;
    if (a.step_index != b.step_index) return a.step_index < b.step_index;
    if (ag != bg) return ag;
    return ai < bi;
  };
  std::vector<Group> groups;
  for (const std::size_t a : order) {
    Group g;
    g.members.push_back({false, a});
    for (std::size_t e = 0; e < d_global.size(); ++e)
      if (ocos(d_global[e].obs, d_new[a].obs) > eps)
        g.members.push_back({true, e});
    auto rec = [&](const OMember& m) -> const Demonstration& {
      return m.global ? d_global[m.idx] : d_new[m.idx];
    };
    double slo = 1e300, shi = -1e300, vlo = 1e300, vhi = -1e300;
    for (const auto& m : g.members) {
      slo = std::min(slo, rec(m).sigma);
      shi = std::max(shi, rec(m).sigma);
      vlo = std::min(vlo, rec(m).v);
      vhi = std::max(vhi, rec(m).v);
    }
    auto omega = [&](const OMember& m) {
      const double ts = shi > slo ? (rec(m).sigma - slo) / (shi - slo) : 0.5;
      const double tv = vhi > vlo ? (rec(m).v - vlo) / (vhi - vlo) : 0.5;
      return ts + tv;
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < g.members.size(); ++i) {
      const double oi = omega(g.members[i]), ob = omega(g.members[best]);
      if (oi > ob || (oi == ob && earlier(rec(g.members[i]), g.members[i].global,
                                          g.members[i].idx, rec(g.members[best]),
                                          g.members[best].global,
                                          g.members[best].idx)))
        best = i;
    }
    g.winner = g.members[best];
    groups.push_back(std::move(g));
  }
  std::vector<char> win_new(d_new.size(), 0), win_glob(d_global.size(), 0);
  for (const auto& g : groups)
    (g.winner.global ? win_glob[g.winner.idx] : win_new[g.winner.idx]) = 1;
  for (const auto& g : groups) {
    const Action wa = g.winner.global ? d_global[g.winner.idx].action
                                      : d_new[g.winner.idx].action;
    for (const auto& m : g.members) {
      if (m.global ? win_glob[m.idx] : win_new[m.idx]) continue;
      (m.global ? d_global[m.idx] : d_new[m.idx]).action = wa;
    }
  }
}

Verdict criterion_conflict() {
  Rng rng(888);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::array<double, kObsDim>> pool;
    for (int k = 0; k < 5; ++k) {
      std::array<double, kObsDim> o;
      for (auto& x : o) x = rng.uniform(0.05, 1.0);
      pool.push_back(o);
    }
    auto fill = [&](Dataset& d, int n, int rollout) {
      for (int k = 0; k < n; ++k) {
        Demonstration demo;
        demo.obs = pool[rng.uniform_int(pool.size())];
        if (rng.bernoulli(0.4))
          for (auto& x : demo.obs) x *= rng.uniform(0.5, 2.0);
        if (rng.bernoulli(0.4))
          for (auto& x : demo.obs) x += rng.uniform(0.0, 0.05);
        demo.sigma = rng.uniform(-0.5, 1.0);
        demo.v = rng.uniform(0.0, 8.0);
        demo.rollout_id = rollout + static_cast<int>(rng.uniform_int(3));
        demo.step_index = static_cast<int>(rng.uniform_int(30));
        demo.action = {rng.uniform(-0.4, 0.4), rng.uniform(0.0, 8.0)};
        d.push_back(demo);
      }
    };
    Dataset d_global, d_new;
    fill(d_global, 12, trial);
    fill(d_new, 7, trial + 60);

    Dataset on = d_new, og = d_global;
    oracle_resolve(on, og, 0.99);
    resolve_conflicts(d_new, d_global, 0.99);
    for (std::size_t k = 0; k < d_new.size(); ++k)
      if (d_new[k].action.steering != on[k].action.steering ||
          d_new[k].action.speed != on[k].action.speed)
        return {false, "oracle mismatch (new set) on fixture " +
                           std::to_string(trial)};
    for (std::size_t k = 0; k < d_global.size(); ++k)
      if (d_global[k].action.steering != og[k].action.steering ||
          d_global[k].action.speed != og[k].action.speed)
        return {false, "oracle mismatch (stored set) on fixture " +
                           std::to_string(trial)};
    const ResolveStats again = resolve_conflicts(d_new, d_global, 0.99);
    if (again.labels_replaced != 0)
      return {false, "not idempotent on fixture " + std::to_string(trial)};
  }
  return {true, "50 fixtures match the brute-force oracle; idempotent on all"};
}

// ------------------------------------------------ 5: removal-ratio trend

double run_removal_ratio(const TrackWorld& world, double pu,
                         std::uint64_t seed) {
  RunConfig rc = base_run(Mode::HgFilter, 100, seed);
  rc.eval_every = 0;
  const auto experts = make_experts(1, pu, 1.2, 5.0, false, seed);
  const TrainingRun run = run_training(rc, experts, world);
  std::size_t removed = 0;
  for (const auto& m : run.metrics) removed += m.removed;
  const std::size_t collected = removed + run.dataset.size();
  return collected == 0 ? 0.0 : removal_ratio(collected, run.dataset.size());
}

Verdict criterion_removal_trend() {
  const TrackWorld world = shipped_map(1);
  const double pus[3] = {0.1, 0.5, 1.0};
  const double expected[3] = {0.22, 0.34, 0.82};
  double got[3];
  for (int i = 0; i < 3; ++i)
    got[i] = run_removal_ratio(world, pus[i], 20240 + i);
  const bool monotone = got[0] < got[1] && got[1] < got[2];
  int in_window = 0;
  for (int i = 0; i < 3; ++i)
    if (std::abs(got[i] - expected[i]) <= 0.15) ++in_window;
  // Strict monotone ordering is the hard requirement; the reference
  // magnitudes come from a different simulator and are reported for
  // comparison (window +/-0.15).
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "r_beta = %.3f / %.3f / %.3f at P(U) = 0.1 / 0.5 / 1.0, "
                "strictly increasing: %s; %d/3 within +/-0.15 of the "
                "reference 0.22 / 0.34 / 0.82",
                got[0], got[1], got[2], monotone ? "yes" : "no", in_window);
  return {monotone, buf};
}

// --------------------------------------------------- 6: filter benefit

struct SeriesEval {
  std::vector<double> overtake, collision;
};

void eval_run_checkpoints(const TrainingRun& run, const TrackWorld& world,
                          const RunConfig& rc, int eval_n, std::uint64_t seed,
                          SeriesEval& out, int min_rollout = 0) {
  for (const auto& [rollouts, policy] : run.checkpoints) {
    if (rollouts <= min_rollout) continue;
    const EvalResult ev = evaluate_policy(
        policy, world, eval_n,
        Rng::derive(seed, 0xEBA0 + static_cast<std::uint64_t>(rollouts)), rc);
    out.overtake.push_back(ev.overtake_pct);
    out.collision.push_back(ev.collision_pct);
  }
}

Verdict criterion_filter_benefit() {
  const TrackWorld world = shipped_map(1);
  SeriesEval filt, rnd;
  for (int trial = 0; trial < 3; ++trial) {
    const std::uint64_t seed = Rng::derive(3100, trial);
    RunConfig rc = base_run(Mode::HgFilter, 200, seed);
    const auto experts = make_experts(1, 0.5, 1.2, 5.0, false, seed);
    const TrainingRun fr = run_training(rc, experts, world);
    eval_run_checkpoints(fr, world, rc, 50, seed, filt);

    RunConfig rt = rc;
    rt.mode = Mode::HgRandomTrunc;
    for (const auto& m : fr.metrics) rt.budget_schedule.push_back(m.d_size);
    const TrainingRun rr = run_training(rt, experts, world);
    eval_run_checkpoints(rr, world, rt, 50, seed, rnd);
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "overtake %.3f vs %.3f, collision %.3f vs %.3f "
                "(filter vs random truncation, 3 paired trials)",
                mean(filt.overtake), mean(rnd.overtake), mean(filt.collision),
                mean(rnd.collision));
  return {mean(filt.overtake) > mean(rnd.overtake) &&
              mean(filt.collision) < mean(rnd.collision),
          buf};
}

// --------------------------------- 7 and 8: multi-expert harness, cached

struct HarnessRow {
  double mega_overtake_final = 0.0, mega_collision_final = 0.0;
  double experts_overtake = 0.0, experts_collision = 0.0;
  double mega_overtake_late = 0.0;  // mean over checkpoints after rollout 100
};

fs::path harness_cache() { return g_work / "mega_harness.csv"; }

std::vector<HarnessRow> load_harness() {
  std::vector<HarnessRow> rows;
  std::ifstream f(harness_cache());
  if (!f) return rows;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    HarnessRow r;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf",
                    &r.mega_overtake_final, &r.mega_collision_final,
                    &r.experts_overtake, &r.experts_collision,
                    &r.mega_overtake_late) == 5)
      rows.push_back(r);
  }
  return rows;
}

std::vector<HarnessRow> run_mega_harness() {
  auto cached = load_harness();
  if (cached.size() == 3) return cached;

  const TrackWorld world = shipped_map(1);
  std::vector<HarnessRow> rows;
  for (int trial = 0; trial < 3; ++trial) {
    const std::uint64_t seed = Rng::derive(4100, trial);
    RunConfig rc = base_run(Mode::Mega, 200, seed);
    const auto experts = make_experts(5, 0.5, 1.2, 5.0, true, seed);
    const TrainingRun run = run_training(rc, experts, world);

    HarnessRow row;
    const EvalResult fin = evaluate_policy(
        run.final_policy, world, 50, Rng::derive(seed, 0xF1A1), rc);
    row.mega_overtake_final = fin.overtake_pct;
    row.mega_collision_final = fin.collision_pct;

    SeriesEval late;
    eval_run_checkpoints(run, world, rc, 50, seed, late, 100);
    row.mega_overtake_late = late.overtake.empty() ? fin.overtake_pct
                                                   : mean(late.overtake);

    double ov = 0.0, co = 0.0;
    for (int k = 0; k < 5; ++k) {
      const EvalResult ev = evaluate_expert(
          experts[k], world, 50,
          Rng::derive(seed, 0xE0 + static_cast<std::uint64_t>(k)), rc);
      ov += ev.overtake_pct;
      co += ev.collision_pct;
    }
    row.experts_overtake = ov / 5.0;
    row.experts_collision = co / 5.0;
    rows.push_back(row);
  }

  fs::create_directories(g_work);
  std::ofstream f(harness_cache());
  f << "mega_overtake_final,mega_collision_final,experts_overtake,"
       "experts_collision,mega_overtake_late\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  r.mega_overtake_final, r.mega_collision_final,
                  r.experts_overtake, r.experts_collision,
                  r.mega_overtake_late);
    f << buf;
  }
  return rows;
}

Verdict criterion_better_than_experts() {
  const auto rows = run_mega_harness();
  std::vector<double> mo, mc, eo, ec;
  for (const auto& r : rows) {
    mo.push_back(r.mega_overtake_final);
    mc.push_back(r.mega_collision_final);
    eo.push_back(r.experts_overtake);
    ec.push_back(r.experts_collision);
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "learner overtake %.3f vs experts %.3f, collision %.3f vs "
                "%.3f (3 trials, 5 experts, reversal rate 0.5)",
                mean(mo), mean(eo), mean(mc), mean(ec));
  return {mean(mo) > mean(eo) && mean(mc) < mean(ec), buf};
}

Verdict criterion_mega_vs_plain() {
  const auto rows = run_mega_harness();
  std::vector<double> mega_late;
  for (const auto& r : rows) mega_late.push_back(r.mega_overtake_late);

  const TrackWorld world = shipped_map(1);
  SeriesEval plain;
  for (int trial = 0; trial < 3; ++trial) {
    const std::uint64_t seed = Rng::derive(4100, trial);
    RunConfig rc = base_run(Mode::HgPlain, 200, seed);
    const auto experts = make_experts(1, 0.5, 1.2, 5.0, false, seed);
    const TrainingRun run = run_training(rc, experts, world);
    eval_run_checkpoints(run, world, rc, 50, seed, plain, 100);
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "late-checkpoint overtake %.3f (multi-expert, filtered) vs "
                "%.3f (single expert, unfiltered)",
                mean(mega_late), mean(plain.overtake));
  return {mean(mega_late) >= mean(plain.overtake), buf};
}

// ----------------------------------------------------- 9: CLI determinism

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args;
  std::cerr << "+ " << cmd << "\n";
  return std::system(cmd.c_str());
}

Verdict criterion_cli_determinism() {
  const fs::path maps = g_work / "maps";
  const fs::path out_a = g_work / "det_a", out_b = g_work / "det_b";
  std::error_code ec;
  fs::remove_all(out_a, ec);
  fs::remove_all(out_b, ec);
  if (run_cli("genmaps --out " + maps.string()) != 0)
    return {false, "map generation failed"};

  const std::string common =
      " --map " + (maps / "map1.meta").string() +
      " --seed 17 --trials 1 --rollouts 100"
      " --set eval_rollouts=10 --set max_updates=60 --set eval_every=50";
  if (run_cli("recipe mega_vs_hg --out " + out_a.string() + common) != 0)
    return {false, "first recipe run failed"};
  if (run_cli("recipe mega_vs_hg --out " + out_b.string() + common) != 0)
    return {false, "second recipe run failed"};

  std::vector<std::string> files = {"trial_0/results.csv",
                                    "trial_0/metrics_mega.csv",
                                    "trial_0/metrics_hg_filter.csv",
                                    "trial_0/metrics_hg_plain.csv"};
  for (const auto& rel : files) {
    if (!fs::exists(out_a / rel) || !fs::exists(out_b / rel))
      return {false, rel + " missing from a run"};
    if (read_file(out_a / rel) != read_file(out_b / rel))
      return {false, rel + " differs between identical runs"};
  }
  return {true, std::to_string(files.size()) +
                    " output files byte-identical across two identical runs"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 4) {
    std::cerr << "usage: acceptance <criterion 1-9> <cli-binary> <work-dir>\n";
    return 2;
  }
  const int id = std::atoi(argv[1]);
  g_cli = argv[2];
  g_work = argv[3];
  fs::create_directories(g_work);

  static const struct {
    const char* name;
    Verdict (*fn)();
  } table[] = {
      {"gradient correctness", criterion_gradient},
      {"raycast oracle equivalence", criterion_raycast},
      {"filter semantics", criterion_filter},
      {"conflict-resolution oracle", criterion_conflict},
      {"removal-ratio trend", criterion_removal_trend},
      {"filter benefit", criterion_filter_benefit},
      {"better than experts", criterion_better_than_experts},
      {"multi-expert vs plain gated learning", criterion_mega_vs_plain},
      {"CLI determinism", criterion_cli_determinism},
  };
  if (id < 1 || id > 9) {
    std::cerr << "criterion id out of range\n";
    return 2;
  }
  const auto& entry = table[id - 1];
  Verdict v;
  try {
    v = entry.fn();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " ("
            << entry.name << "): " << v.detail << "\n";
  return v.pass ? 0 : 1;
}
