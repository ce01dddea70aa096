#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mega/recipes.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOpts {
  std::string config_path;
  std::string map_meta = "maps/map1.meta";
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

// --map names the .meta file; the image sits next to it with a .pgm suffix
std::string image_for(const std::string& meta) {
  fs::path p(meta);
  p.replace_extension(".pgm");
  return p.string();
}

mega::Config load_config(const CommonOpts& o,
                         const std::vector<std::string>& overrides) {
  mega::Config cfg;
  if (!o.config_path.empty()) cfg.load_file(o.config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override must be key=value: " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed_set) cfg.set("seed", std::to_string(o.seed));
  return cfg;
}

void write_eval_json(const std::string& path, const mega::EvalResult& ev,
                     std::uint64_t seed) {
  json j;
  j["tool"] = "megadagger v1";
  j["seed"] = seed;
  j["overtake_pct"] = ev.overtake_pct;
  j["collision_pct"] = ev.collision_pct;
  j["timeout_pct"] = ev.timeout_pct;
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream f(path);
    f << j.dump(2) << "\n";
  }
}

int cmd_train(const CommonOpts& o, const std::vector<std::string>& overrides) {
  const mega::Config cfg = load_config(o, overrides);
  const mega::RunConfig rc = cfg.make_run_config();
  const int m = rc.mode == mega::Mode::Mega ? cfg.get_i("n_experts") : 1;
  const auto experts = cfg.make_expert_specs(m);
  const mega::TrackWorld world =
      mega::load_track(image_for(o.map_meta), o.map_meta);

  const mega::TrainingRun run = mega::run_training(rc, experts, world);
  fs::create_directories(o.out_dir);
  mega::write_metrics_csv((fs::path(o.out_dir) / "metrics.csv").string(),
                          run.metrics, rc.seed);
  for (const auto& [rollouts, policy] : run.checkpoints) {
    char name[64];
    std::snprintf(name, sizeof(name), "ckpt_%04d.bin", rollouts);
    policy.save((fs::path(o.out_dir) / name).string());
  }
  run.final_policy.save((fs::path(o.out_dir) / "final.bin").string());
  mega::save_dataset((fs::path(o.out_dir) / "dataset.bin").string(),
                     run.dataset);
  {
    std::ofstream f(fs::path(o.out_dir) / "config.effective");
    f << "# megadagger v1 seed=" << rc.seed << "\n" << cfg.dump();
  }
  std::cout << "trained " << rc.total_rollouts << " rollouts, dataset size "
            << run.dataset.size() << ", outputs in " << o.out_dir << "\n";
  return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& checkpoint,
             const std::vector<std::string>& overrides) {
  const mega::Config cfg = load_config(o, overrides);
  const mega::RunConfig rc = cfg.make_run_config();
  if (!fs::exists(checkpoint)) {
    std::cerr << "error: checkpoint not found: " << checkpoint << "\n";
    return kExitRuntime;
  }
  const mega::Policy policy = mega::Policy::load(checkpoint);
  const mega::TrackWorld world =
      mega::load_track(image_for(o.map_meta), o.map_meta);
  const int n = cfg.get_i("eval_rollouts");
  const mega::EvalResult ev =
      mega::evaluate_policy(policy, world, n, rc.seed, rc);

  std::string json_path;
  if (!o.out_dir.empty() && o.out_dir != "-") {
    fs::create_directories(o.out_dir);
    json_path = (fs::path(o.out_dir) / "eval.json").string();
    std::ofstream f(fs::path(o.out_dir) / "collision_points.csv");
    f << "# megadagger v1 seed=" << rc.seed << "\nx_m,y_m,seed\n";
    char buf[128];
    for (const auto& p : ev.collision_points) {
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%llu\n", p.x, p.y,
                    static_cast<unsigned long long>(rc.seed));
      f << buf;
    }
  }
  write_eval_json(json_path, ev, rc.seed);
  if (!json_path.empty()) write_eval_json("", ev, rc.seed);
  return 0;
}

int cmd_inspect(const std::string& dataset_path) {
  if (!fs::exists(dataset_path)) {
    std::cerr << "error: dataset not found: " << dataset_path << "\n";
    return kExitRuntime;
  }
  const mega::Dataset d = mega::load_dataset(dataset_path);
  json j;
  j["tool"] = "megadagger v1";
  j["size"] = d.size();
  if (!d.empty()) {
    double smin = d[0].sigma, smax = d[0].sigma, ssum = 0.0, vsum = 0.0;
    std::map<int, std::size_t> per_expert;
    for (const auto& demo : d) {
      smin = std::min(smin, demo.sigma);
      smax = std::max(smax, demo.sigma);
      ssum += demo.sigma;
      vsum += demo.v;
      per_expert[demo.expert_id]++;
    }
    j["sigma"] = {{"min", smin}, {"max", smax}, {"mean", ssum / d.size()}};
    j["speed_mean"] = vsum / d.size();
    for (const auto& [id, n] : per_expert)
      j["per_expert"][std::to_string(id)] = n;
    // 20-bin sigma histogram
    std::vector<std::size_t> hist(20, 0);
    const double span = smax > smin ? smax - smin : 1.0;
    for (const auto& demo : d) {
      int b = static_cast<int>((demo.sigma - smin) / span * 20.0);
      hist[std::clamp(b, 0, 19)]++;
    }
    j["sigma_histogram"] = hist;
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"head-to-head racing simulator and gated imitation-learning "
               "trainer"};
  app.require_subcommand(1);

  CommonOpts o;
  std::vector<std::string> overrides;
  std::string checkpoint, dataset_path, recipe_name, results_dir;
  int trials = -1, rollouts = -1;
  std::string mode_override;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "config file (key=value)");
    sub->add_option("--map", o.map_meta, "track metadata file (.meta)");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--seed", o.seed, "top-level seed")
        ->each([&](const std::string&) { o.seed_set = true; });
    sub->add_option("--set", overrides, "config override key=value");
    sub->add_option("--rollouts", rollouts, "training rollouts");
    sub->add_option("--mode", mode_override,
                    "mega | hg_filter | hg_plain | hg_random_trunc");
  };

  auto* train = app.add_subcommand("train", "run one training run");
  add_common(train);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "policy checkpoint")->required();

  auto* recipe = app.add_subcommand("recipe", "run a named experiment");
  add_common(recipe);
  recipe->add_option("name", recipe_name, "recipe name")->required();
  recipe->add_option("--trials", trials, "number of trials");

  auto* inspect = app.add_subcommand("inspect", "dataset statistics");
  inspect->add_option("--dataset", dataset_path, "dataset.bin")->required();

  auto* exp = app.add_subcommand("export", "rebuild plot CSVs from results");
  exp->add_option("--results", results_dir, "recipe output dir")->required();

  auto* genmaps = app.add_subcommand("genmaps", "write the bundled tracks");
  genmaps->add_option("--out", o.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (rollouts >= 0) overrides.push_back("rollouts=" + std::to_string(rollouts));
    if (!mode_override.empty()) overrides.push_back("mode=" + mode_override);

    if (train->parsed()) return cmd_train(o, overrides);
    if (eval->parsed()) return cmd_eval(o, checkpoint, overrides);
    if (inspect->parsed()) return cmd_inspect(dataset_path);
    if (exp->parsed()) {
      mega::export_plot_data(results_dir);
      return 0;
    }
    if (genmaps->parsed()) {
      mega::SynthTrackSpec s1;
      s1.name = "map1";
      s1.shape = 1;
      mega::write_synthetic_track(s1, o.out_dir);
      mega::SynthTrackSpec s2;
      s2.name = "map2";
      s2.shape = 2;
      mega::write_synthetic_track(s2, o.out_dir);
      std::cout << "wrote map1 and map2 to " << o.out_dir << "\n";
      return 0;
    }
    if (recipe->parsed()) {
      mega::RecipeContext ctx;
      ctx.cfg = load_config(o, overrides);
      ctx.map_meta = o.map_meta;
      ctx.map_image = image_for(o.map_meta);
      ctx.out_dir = o.out_dir;
      ctx.trials = trials > 0 ? trials : ctx.cfg.get_i("trials");
      ctx.seed = ctx.cfg.get_u("seed");
      run_recipe(recipe_name, ctx);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
