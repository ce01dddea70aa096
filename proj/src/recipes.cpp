#include "mega/recipes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mega {
namespace fs = std::filesystem;

namespace {

struct ResultRow {
  std::string series;
  double x = 0.0;
  double overtake = 0.0;
  double collision = 0.0;
  double timeout = 0.0;
  double r_beta = 0.0;
};

struct LabeledPoint {
  Vec2 p;
  std::string label;
};

double run_r_beta(const TrainingRun& run) {
  std::size_t removed = 0;
  for (const auto& m : run.metrics) removed += m.removed;
  const std::size_t collected = removed + run.dataset.size();
  return collected == 0 ? 0.0 : removal_ratio(collected, run.dataset.size());
}

void write_results_csv(const std::string& path,
                       const std::vector<ResultRow>& rows,
                       std::uint64_t seed) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write results: " + path);
  f << "# megadagger v1 seed=" << seed << "\n";
  f << "series,x,overtake_pct,collision_pct,timeout_pct,r_beta\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  r.series.c_str(), r.x, r.overtake, r.collision, r.timeout,
                  r.r_beta);
    f << buf;
  }
}

void write_points_csv(const std::string& path,
                      const std::vector<LabeledPoint>& pts,
                      std::uint64_t seed) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write points: " + path);
  f << "# megadagger v1 seed=" << seed << "\n";
  f << "x_m,y_m,agent_label\n";
  char buf[160];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%s\n", p.p.x, p.p.y,
                  p.label.c_str());
    f << buf;
  }
}

struct TrialIO {
  fs::path dir;
  std::uint64_t seed = 0;
  std::vector<ResultRow> rows;
  std::vector<LabeledPoint> points;

  bool already_done() const { return fs::exists(dir / "done"); }
  void finish() const {
    write_results_csv((dir / "results.csv").string(), rows, seed);
    if (!points.empty())
      write_points_csv((dir / "collision_points.csv").string(), points, seed);
    std::ofstream(dir / "done") << "ok\n";
  }
};

// evaluates every checkpoint of a run and appends one row per checkpoint
void eval_checkpoints(const TrainingRun& run, const std::string& series,
                      const TrackWorld& world, const RunConfig& rc,
                      int eval_rollouts, std::uint64_t trial_seed,
                      TrialIO& io, double r_beta) {
  for (const auto& [rollouts, policy] : run.checkpoints) {
    const EvalResult ev = evaluate_policy(
        policy, world, eval_rollouts,
        Rng::derive(trial_seed, 0xEBA0 + static_cast<std::uint64_t>(rollouts)),
        rc);
    io.rows.push_back({series, static_cast<double>(rollouts), ev.overtake_pct,
                       ev.collision_pct, ev.timeout_pct, r_beta});
  }
}

using TrialFn = std::function<void(const RecipeContext&, const TrackWorld&,
                                   std::uint64_t, TrialIO&)>;

void trial_pu_sweep(const RecipeContext& ctx, const TrackWorld& world,
                    std::uint64_t trial_seed, TrialIO& io) {
  const int eval_n = ctx.cfg.get_i("eval_rollouts");
  for (int k = 1; k <= 10; ++k) {
    const double pu = 0.1 * k;
    Config c = ctx.cfg;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", pu);
    c.set("pu", buf);
    c.set("mode", "hg_filter");
    c.set("expert_jitter", "false");
    RunConfig rc = c.make_run_config();
    rc.seed = Rng::derive(trial_seed, 0x9500 + static_cast<std::uint64_t>(k));
    const auto experts = make_experts(1, pu, c.get_d("lookahead"),
                                      c.get_d("switch_trigger"), false, rc.seed);
    const TrainingRun run = run_training(rc, experts, world);
    const EvalResult ev = evaluate_policy(
        run.final_policy, world, eval_n, Rng::derive(rc.seed, 0xEBAF), rc);
    io.rows.push_back({"hg_filter", pu, ev.overtake_pct, ev.collision_pct,
                       ev.timeout_pct, run_r_beta(run)});
    write_metrics_csv((io.dir / ("metrics_pu_" + std::string(buf) + ".csv"))
                          .string(),
                      run.metrics, rc.seed);
  }
}

void trial_filter_vs_random(const RecipeContext& ctx, const TrackWorld& world,
                            std::uint64_t trial_seed, TrialIO& io) {
  const int eval_n = ctx.cfg.get_i("eval_rollouts");
  Config c = ctx.cfg;
  c.set("mode", "hg_filter");
  c.set("expert_jitter", "false");
  RunConfig rc = c.make_run_config();
  rc.seed = trial_seed;
  const auto experts =
      make_experts(1, c.get_d("pu"), c.get_d("lookahead"),
                   c.get_d("switch_trigger"), false, trial_seed);

  const TrainingRun filter_run = run_training(rc, experts, world);
  eval_checkpoints(filter_run, "hg_filter", world, rc, eval_n, trial_seed, io,
                   run_r_beta(filter_run));
  write_metrics_csv((io.dir / "metrics_hg_filter.csv").string(),
                    filter_run.metrics, rc.seed);

  // paired baseline: same seeds, demonstration budget copied per rollout
  RunConfig rt = rc;
  rt.mode = Mode::HgRandomTrunc;
  for (const auto& m : filter_run.metrics)
    rt.budget_schedule.push_back(m.d_size);
  const TrainingRun rand_run = run_training(rt, experts, world);
  eval_checkpoints(rand_run, "hg_random_trunc", world, rt, eval_n, trial_seed,
                   io, run_r_beta(rand_run));
  write_metrics_csv((io.dir / "metrics_hg_random_trunc.csv").string(),
                    rand_run.metrics, rt.seed);
}

void trial_mega_vs_hg(const RecipeContext& ctx, const TrackWorld& world,
                      std::uint64_t trial_seed, TrialIO& io) {
  const int eval_n = ctx.cfg.get_i("eval_rollouts");
  struct Entry {
    std::string series;
    std::string mode;
    int n_experts;
  };
  const Entry entries[] = {{"mega", "mega", ctx.cfg.get_i("n_experts")},
                           {"hg_filter", "hg_filter", 1},
                           {"hg_plain", "hg_plain", 1}};
  for (const auto& e : entries) {
    Config c = ctx.cfg;
    c.set("mode", e.mode);
    RunConfig rc = c.make_run_config();
    rc.seed = trial_seed;
    const auto experts =
        make_experts(e.n_experts, c.get_d("pu"), c.get_d("lookahead"),
                     c.get_d("switch_trigger"),
                     e.n_experts > 1 && c.get_b("expert_jitter"), trial_seed);
    const TrainingRun run = run_training(rc, experts, world);
    eval_checkpoints(run, e.series, world, rc, eval_n, trial_seed, io,
                     run_r_beta(run));
    write_metrics_csv((io.dir / ("metrics_" + e.series + ".csv")).string(),
                      run.metrics, rc.seed);
  }
}

void trial_beta_sweep(const RecipeContext& ctx, const TrackWorld& world,
                      std::uint64_t trial_seed, TrialIO& io) {
  const int eval_n = ctx.cfg.get_i("eval_rollouts");
  for (int beta = 0; beta <= 100; beta += 10) {
    Config c = ctx.cfg;
    c.set("beta", std::to_string(beta));
    c.set("mode", "hg_filter");
    c.set("expert_jitter", "false");
    RunConfig rc = c.make_run_config();
    rc.seed = Rng::derive(trial_seed, 0xBE7A + static_cast<std::uint64_t>(beta));
    const auto experts = make_experts(1, c.get_d("pu"), c.get_d("lookahead"),
                                      c.get_d("switch_trigger"), false, rc.seed);
    const TrainingRun run = run_training(rc, experts, world);
    const EvalResult ev = evaluate_policy(
        run.final_policy, world, eval_n, Rng::derive(rc.seed, 0xEBAF), rc);
    io.rows.push_back({"hg_filter", static_cast<double>(beta), ev.overtake_pct,
                       ev.collision_pct, ev.timeout_pct, run_r_beta(run)});
  }
}

void trial_expert_vs_novice(const RecipeContext& ctx, const TrackWorld& world,
                            std::uint64_t trial_seed, TrialIO& io) {
  const int eval_n = ctx.cfg.get_i("eval_rollouts");
  Config c = ctx.cfg;
  c.set("mode", "mega");
  RunConfig rc = c.make_run_config();
  rc.seed = trial_seed;
  const int m = c.get_i("n_experts");
  const auto experts =
      make_experts(m, c.get_d("pu"), c.get_d("lookahead"),
                   c.get_d("switch_trigger"), c.get_b("expert_jitter"),
                   trial_seed);
  const TrainingRun run = run_training(rc, experts, world);
  write_metrics_csv((io.dir / "metrics_mega.csv").string(), run.metrics,
                    rc.seed);

  const EvalResult nov = evaluate_policy(run.final_policy, world, eval_n,
                                         Rng::derive(trial_seed, 0xEBAF), rc);
  io.rows.push_back({"mega", 0.0, nov.overtake_pct, nov.collision_pct,
                     nov.timeout_pct, run_r_beta(run)});
  for (const auto& p : nov.collision_points) io.points.push_back({p, "mega"});

  double cum_ov = 0.0, cum_co = 0.0, cum_to = 0.0;
  for (int k = 0; k < m; ++k) {
    const EvalResult ev = evaluate_expert(
        experts[k], world, eval_n,
        Rng::derive(trial_seed, 0xE0 + static_cast<std::uint64_t>(k)), rc);
    const std::string label = "expert_" + std::to_string(k + 1);
    io.rows.push_back({label, static_cast<double>(k + 1), ev.overtake_pct,
                       ev.collision_pct, ev.timeout_pct, 0.0});
    for (const auto& p : ev.collision_points) io.points.push_back({p, label});
    cum_ov += ev.overtake_pct;
    cum_co += ev.collision_pct;
    cum_to += ev.timeout_pct;
  }
  io.rows.push_back({"experts_cumulative", 0.0, cum_ov / m, cum_co / m,
                     cum_to / m, 0.0});
}

TrialFn trial_fn(const std::string& name) {
  if (name == "pu_sweep") return trial_pu_sweep;
  if (name == "filter_vs_random") return trial_filter_vs_random;
  if (name == "mega_vs_hg") return trial_mega_vs_hg;
  if (name == "beta_sweep") return trial_beta_sweep;
  if (name == "expert_vs_novice") return trial_expert_vs_novice;
  throw std::invalid_argument("unknown recipe: " + name);
}

}  // namespace

void run_recipe(const std::string& name, const RecipeContext& ctx) {
  const TrialFn fn = trial_fn(name);
  const TrackWorld world = load_track(ctx.map_image, ctx.map_meta);
  fs::create_directories(ctx.out_dir);

  {
    std::ofstream f(fs::path(ctx.out_dir) / "config.effective");
    f << "# megadagger v1 seed=" << ctx.seed << "\n" << ctx.cfg.dump();
  }

  for (int t = 0; t < ctx.trials; ++t) {
    TrialIO io;
    io.dir = fs::path(ctx.out_dir) / ("trial_" + std::to_string(t));
    io.seed = Rng::derive(ctx.seed, 0x7100 + static_cast<std::uint64_t>(t));
    if (io.already_done()) {
      std::cerr << "trial " << t << " already complete, skipping\n";
      continue;
    }
    fs::create_directories(io.dir);
    fn(ctx, world, io.seed, io);
    io.finish();
  }
  export_plot_data(ctx.out_dir);
}

void export_plot_data(const std::string& results_dir) {
  struct Key {
    std::string series;
    double x;
    bool operator<(const Key& o) const {
      return series < o.series || (series == o.series && x < o.x);
    }
  };
  struct Acc {
    std::vector<double> overtake, collision, r_beta;
  };
  std::map<Key, Acc> acc;
  std::uint64_t seed = 0;
  bool have_seed = false;

  std::vector<fs::path> trial_dirs;
  if (fs::exists(results_dir))
    for (const auto& e : fs::directory_iterator(results_dir))
      if (e.is_directory() &&
          e.path().filename().string().rfind("trial_", 0) == 0)
        trial_dirs.push_back(e.path());
  std::sort(trial_dirs.begin(), trial_dirs.end());

  for (const auto& dir : trial_dirs) {
    std::ifstream f(dir / "results.csv");
    if (!f) continue;
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        const auto pos = line.find("seed=");
        if (!have_seed && pos != std::string::npos) {
          seed = std::stoull(line.substr(pos + 5));
          have_seed = true;
        }
        continue;
      }
      if (line.rfind("series,", 0) == 0) continue;
      std::stringstream ss(line);
      std::string series, tok;
      std::getline(ss, series, ',');
      double vals[5];
      int i = 0;
      while (i < 5 && std::getline(ss, tok, ',')) vals[i++] = std::stod(tok);
      if (i < 5) continue;
      Acc& a = acc[{series, vals[0]}];
      a.overtake.push_back(vals[1]);
      a.collision.push_back(vals[2]);
      a.r_beta.push_back(vals[4]);
    }
  }
  if (acc.empty())
    throw std::runtime_error("no trial results found in " + results_dir);

  auto write_metric = [&](const std::string& metric,
                          std::vector<double> Acc::*field) {
    std::ostringstream out;
    out << "# megadagger v1 seed=" << seed << "\n";
    out << "x,mean,ci_low,ci_high,series\n";
    char buf[200];
    for (const auto& [key, a] : acc) {
      const auto& v = a.*field;
      const double n = static_cast<double>(v.size());
      double mean = 0.0;
      for (const double x : v) mean += x;
      mean /= n;
      double var = 0.0;
      for (const double x : v) var += (x - mean) * (x - mean);
      const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
      const double ci = 1.96 * sd / std::sqrt(n);
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%s\n", key.x, mean,
                    mean - ci, mean + ci, key.series.c_str());
      out << buf;
    }
    std::ofstream f(fs::path(results_dir) / ("aggregate_" + metric + ".csv"));
    f << out.str();
  };
  write_metric("overtake", &Acc::overtake);
  write_metric("collision", &Acc::collision);
  write_metric("r_beta", &Acc::r_beta);
}

}  // namespace mega
