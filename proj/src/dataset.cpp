#include "mega/dataset.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mega {

namespace {
constexpr char kMagic[] = "megadata v1\n";
}

void save_dataset(const std::string& path, const Dataset& d) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write dataset: " + path);
  f << kMagic;
  const std::uint64_t n = d.size();
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const auto& demo : d) {
    float rec[kObsDim + 4];
    for (int i = 0; i < kObsDim; ++i) rec[i] = static_cast<float>(demo.obs[i]);
    rec[kObsDim + 0] = static_cast<float>(demo.action.steering);
    rec[kObsDim + 1] = static_cast<float>(demo.action.speed);
    rec[kObsDim + 2] = static_cast<float>(demo.sigma);
    rec[kObsDim + 3] = static_cast<float>(demo.v);
    f.write(reinterpret_cast<const char*>(rec), sizeof(rec));
    const std::int32_t ids[3] = {demo.expert_id, demo.rollout_id,
                                 demo.step_index};
    f.write(reinterpret_cast<const char*>(ids), sizeof(ids));
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("dataset not found: " + path);
  char magic[sizeof(kMagic)] = {};
  f.read(magic, sizeof(kMagic) - 1);
  if (std::strncmp(magic, kMagic, sizeof(kMagic) - 1) != 0)
    throw std::runtime_error("bad dataset format: " + path);
  std::uint64_t n = 0;
  f.read(reinterpret_cast<char*>(&n), sizeof(n));
  Dataset d(n);
  for (auto& demo : d) {
    float rec[kObsDim + 4];
    std::int32_t ids[3];
    f.read(reinterpret_cast<char*>(rec), sizeof(rec));
    f.read(reinterpret_cast<char*>(ids), sizeof(ids));
    if (!f) throw std::runtime_error("truncated dataset: " + path);
    for (int i = 0; i < kObsDim; ++i) demo.obs[i] = rec[i];
    demo.action = {rec[kObsDim + 0], rec[kObsDim + 1]};
    demo.sigma = rec[kObsDim + 2];
    demo.v = rec[kObsDim + 3];
    demo.expert_id = ids[0];
    demo.rollout_id = ids[1];
    demo.step_index = ids[2];
  }
  return d;
}

}  // namespace mega
