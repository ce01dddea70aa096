#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mega/vehicle.hpp"

namespace mega {

inline constexpr int kObsDim = 108;

struct Demonstration {
  std::array<double, kObsDim> obs{};  // downsampled, normalized scan
  Action action;
  double sigma = 0.0;  // safety score
  double v = 0.0;      // ego speed when recorded, m/s
  int expert_id = 0;
  int rollout_id = 0;
  int step_index = 0;
};

// Append-only global store; conflict resolution may replace action labels
// in place but never creates or destroys records.
using Dataset = std::vector<Demonstration>;

// flat binary dump for `inspect` (f32 obs/action/sigma/v + i32 ids)
void save_dataset(const std::string& path, const Dataset& d);
Dataset load_dataset(const std::string& path);

}  // namespace mega
