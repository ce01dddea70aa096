#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "mega/dataset.hpp"

namespace mega {

// Feed-forward policy network 108 -> 256 -> 256 -> 2, tanh hidden layers,
// identity output. Raw outputs are squashed into actuator range by act().
class Policy {
 public:
  static constexpr int kIn = kObsDim;
  static constexpr int kHidden = 256;
  static constexpr int kOut = 2;
  static constexpr std::size_t kParamCount =
      static_cast<std::size_t>(kIn) * kHidden + kHidden +
      static_cast<std::size_t>(kHidden) * kHidden + kHidden +
      static_cast<std::size_t>(kHidden) * kOut + kOut;

  Policy();

  // uniform fan-in-scaled initialization, fully determined by seed
  static Policy init(std::uint64_t seed);

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // hidden activation: tanh by default; identity is a test-harness hook
  bool tanh_hidden = true;

  // raw network outputs (pre-squash), one observation
  Eigen::Vector2d forward_raw(const std::array<double, kObsDim>& obs) const;

  // squashed action: steering = max_steer*tanh(raw0), speed =
  // max_speed*sigmoid(raw1); satisfies Action invariants by construction
  Action act(const std::array<double, kObsDim>& obs,
             const VehicleParams& vp) const;

  void save(const std::string& path) const;
  static Policy load(const std::string& path);

  bool finite() const { return params_.allFinite(); }

  // parameter views (maps into the flat vector)
  Eigen::Map<Eigen::MatrixXd> w1();
  Eigen::Map<Eigen::VectorXd> b1();
  Eigen::Map<Eigen::MatrixXd> w2();
  Eigen::Map<Eigen::VectorXd> b2();
  Eigen::Map<Eigen::MatrixXd> w3();
  Eigen::Map<Eigen::VectorXd> b3();
  Eigen::Map<const Eigen::MatrixXd> w1() const;
  Eigen::Map<const Eigen::VectorXd> b1() const;
  Eigen::Map<const Eigen::MatrixXd> w2() const;
  Eigen::Map<const Eigen::VectorXd> b2() const;
  Eigen::Map<const Eigen::MatrixXd> w3() const;
  Eigen::Map<const Eigen::VectorXd> b3() const;

 private:
  Eigen::VectorXd params_;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 100;
  std::uint64_t seed = 0;
  // hard cap on optimizer updates per train() call; 0 = no cap
  int max_updates = 0;
};

// uniform stride-10 downsample, clipped to max_range and normalized to (0, 1]
std::array<double, kObsDim> downsample(const std::vector<double>& scan,
                                       double max_range);

// MSE loss on raw outputs against pre-squash targets, plus its gradient
// with respect to all parameters. X is batch x 108, T is batch x 2.
double loss_and_gradient(const Policy& p, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& T, Eigen::VectorXd* grad);

// inverse of the output squash, clamped 1e-4 away from the boundary
Eigen::Vector2d action_to_target(const Action& a, const VehicleParams& vp);

struct TrainResult {
  Policy policy;
  double final_loss = 0.0;
  int updates = 0;
};

// Adam on seeded shuffled mini-batches; deterministic given (p0, data, cfg).
TrainResult train(const Policy& p0, const Dataset& data, const TrainConfig& cfg,
                  const VehicleParams& vp);

// Central finite differences (step 1e-5) on n_params randomly chosen
// parameters; returns the max relative error against analytic gradients.
double gradient_check(const Policy& p, const Eigen::MatrixXd& X,
                      const Eigen::MatrixXd& T, int n_params,
                      std::uint64_t seed);

}  // namespace mega
