#pragma once

#include <string>
#include <vector>

#include "mega/config.hpp"

namespace mega {

// Named experiment recipes. Each trial writes into its own subdirectory of
// out_dir and drops a `done` marker, so re-running with the same output
// directory and seeds skips completed trials; aggregation is recomputed
// from the per-trial files every time.
inline const std::vector<std::string>& recipe_names() {
  static const std::vector<std::string> names = {
      "pu_sweep", "filter_vs_random", "mega_vs_hg", "beta_sweep",
      "expert_vs_novice"};
  return names;
}

struct RecipeContext {
  Config cfg;
  std::string map_image;
  std::string map_meta;
  std::string out_dir;
  int trials = 1;
  std::uint64_t seed = 0;
};

void run_recipe(const std::string& name, const RecipeContext& ctx);

// Rebuilds the tidy per-figure CSVs (x, mean, ci_low, ci_high, series)
// from the trial results under results_dir. Throws if no trial data exists.
void export_plot_data(const std::string& results_dir);

}  // namespace mega
