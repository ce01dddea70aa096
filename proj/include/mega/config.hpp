#pragma once

#include <map>
#include <string>
#include <vector>

#include "mega/orchestrator.hpp"

namespace mega {

// Flat key=value configuration. Every tunable has a named key and a
// default; file values override defaults, CLI flags override the file.
// Unknown keys are an error.
class Config {
 public:
  Config();  // defaults

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double get_d(const std::string& key) const;
  int get_i(const std::string& key) const;
  bool get_b(const std::string& key) const;
  std::uint64_t get_u(const std::string& key) const;
  const std::string& get_s(const std::string& key) const;

  // sorted key=value lines; load(dump()) is idempotent
  std::string dump() const;

  RunConfig make_run_config() const;
  std::vector<ExpertSpec> make_expert_specs(int m) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mega
