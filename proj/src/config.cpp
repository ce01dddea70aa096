#include "mega/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mega {

Config::Config() {
  values_ = {
      // vehicle
      {"wheelbase", "0.33"},
      {"max_steer", "0.41"},
      {"max_speed", "8.0"},
      {"steer_rate", "3.2"},
      {"accel", "9.0"},
      {"footprint_length", "0.5"},
      {"footprint_width", "0.3"},
      // simulation
      {"physics_dt", "0.01"},
      {"substeps_per_control", "2"},
      {"max_steps", "5000"},
      {"gap_start", "3.0"},
      {"overtake_margin", "1.0"},
      {"opp_speed_scale", "0.8"},
      {"n_beams", "1080"},
      {"fov", "4.71238898038469"},
      {"max_range", "30.0"},
      // gate
      {"gate_d_take", "0.9"},
      {"gate_d_release", "1.5"},
      {"gate_n_safe", "25"},
      // experts
      {"pu", "0.5"},
      {"lookahead", "1.2"},
      {"switch_trigger", "5.0"},
      {"n_experts", "5"},
      {"expert_jitter", "true"},
      {"opp_lookahead", "1.2"},
      {"opp_switch_trigger", "5.0"},
      // safety filter
      {"alpha", "0.6"},
      {"gamma", "0.2"},
      {"beta", "20"},
      {"literal_eq3", "false"},
      // conflict resolution
      {"epsilon", "0.99"},
      {"w_sigma", "1.0"},
      {"w_speed", "1.0"},
      // training
      {"learning_rate", "0.001"},
      {"batch_size", "64"},
      {"epochs", "100"},
      {"max_updates", "300"},
      {"warm_start", "false"},
      // run
      {"mode", "mega"},
      {"rollouts", "200"},
      {"eval_every", "100"},
      {"eval_rollouts", "100"},
      {"trials", "3"},
      {"seed", "0"},
  };
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end())
    throw std::invalid_argument("unknown config key: " + key);
  it->second = value;
}

void Config::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key=value, got '" + t + "'");
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

double Config::get_d(const std::string& key) const {
  try {
    return std::stod(get_s(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "' is not a number: " +
                                get_s(key));
  }
}

int Config::get_i(const std::string& key) const {
  try {
    return std::stoi(get_s(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "' is not an integer: " +
                                get_s(key));
  }
}

std::uint64_t Config::get_u(const std::string& key) const {
  try {
    return std::stoull(get_s(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "' is not an integer: " +
                                get_s(key));
  }
}

bool Config::get_b(const std::string& key) const {
  const std::string& v = get_s(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config key '" + key + "' is not a bool: " + v);
}

const std::string& Config::get_s(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw std::invalid_argument("unknown config key: " + key);
  return it->second;
}

std::string Config::dump() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << "=" << v << "\n";
  return out.str();
}

RunConfig Config::make_run_config() const {
  RunConfig rc;
  rc.mode = mode_from_string(get_s("mode"));
  rc.total_rollouts = get_i("rollouts");
  rc.eval_every = get_i("eval_every");
  rc.seed = get_u("seed");

  rc.sim.vehicle.wheelbase = get_d("wheelbase");
  rc.sim.vehicle.max_steer = get_d("max_steer");
  rc.sim.vehicle.max_speed = get_d("max_speed");
  rc.sim.vehicle.steer_rate = get_d("steer_rate");
  rc.sim.vehicle.accel = get_d("accel");
  rc.sim.vehicle.footprint_length = get_d("footprint_length");
  rc.sim.vehicle.footprint_width = get_d("footprint_width");
  rc.sim.physics_dt = get_d("physics_dt");
  rc.sim.substeps_per_control = get_i("substeps_per_control");
  rc.sim.max_steps = get_i("max_steps");
  rc.sim.gap_start = get_d("gap_start");
  rc.sim.overtake_margin = get_d("overtake_margin");
  rc.sim.opp_speed_scale = get_d("opp_speed_scale");
  rc.sim.n_beams = get_i("n_beams");
  rc.sim.fov = get_d("fov");
  rc.sim.max_range = get_d("max_range");

  rc.gate.d_take = get_d("gate_d_take");
  rc.gate.d_release = get_d("gate_d_release");
  rc.gate.n_safe = get_i("gate_n_safe");

  rc.safety.alpha = get_d("alpha");
  rc.safety.gamma = get_d("gamma");
  rc.safety.beta = get_i("beta");
  rc.safety.literal_eq3 = get_b("literal_eq3");

  rc.epsilon = get_d("epsilon");
  rc.w_sigma = get_d("w_sigma");
  rc.w_speed = get_d("w_speed");

  rc.train.learning_rate = get_d("learning_rate");
  rc.train.batch_size = get_i("batch_size");
  rc.train.epochs = get_i("epochs");
  rc.train.max_updates = get_i("max_updates");
  rc.train.seed = rc.seed;
  rc.warm_start = get_b("warm_start");

  rc.opp_lookahead = get_d("opp_lookahead");
  rc.opp_switch_trigger = get_d("opp_switch_trigger");
  return rc;
}

std::vector<ExpertSpec> Config::make_expert_specs(int m) const {
  return make_experts(m, get_d("pu"), get_d("lookahead"),
                      get_d("switch_trigger"), get_b("expert_jitter"),
                      get_u("seed"));
}

}  // namespace mega
