#include "mega/policy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mega/rng.hpp"

namespace mega {

namespace {
constexpr std::size_t kW1 = 0;
constexpr std::size_t kB1 = kW1 + static_cast<std::size_t>(Policy::kHidden) * Policy::kIn;
constexpr std::size_t kW2 = kB1 + Policy::kHidden;
constexpr std::size_t kB2 = kW2 + static_cast<std::size_t>(Policy::kHidden) * Policy::kHidden;
constexpr std::size_t kW3 = kB2 + Policy::kHidden;
constexpr std::size_t kB3 = kW3 + static_cast<std::size_t>(Policy::kOut) * Policy::kHidden;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

Policy::Policy() : params_(Eigen::VectorXd::Zero(kParamCount)) {}

Eigen::Map<Eigen::MatrixXd> Policy::w1() { return {params_.data() + kW1, kHidden, kIn}; }
Eigen::Map<Eigen::VectorXd> Policy::b1() { return {params_.data() + kB1, kHidden}; }
Eigen::Map<Eigen::MatrixXd> Policy::w2() { return {params_.data() + kW2, kHidden, kHidden}; }
Eigen::Map<Eigen::VectorXd> Policy::b2() { return {params_.data() + kB2, kHidden}; }
Eigen::Map<Eigen::MatrixXd> Policy::w3() { return {params_.data() + kW3, kOut, kHidden}; }
Eigen::Map<Eigen::VectorXd> Policy::b3() { return {params_.data() + kB3, kOut}; }
Eigen::Map<const Eigen::MatrixXd> Policy::w1() const { return {params_.data() + kW1, kHidden, kIn}; }
Eigen::Map<const Eigen::VectorXd> Policy::b1() const { return {params_.data() + kB1, kHidden}; }
Eigen::Map<const Eigen::MatrixXd> Policy::w2() const { return {params_.data() + kW2, kHidden, kHidden}; }
Eigen::Map<const Eigen::VectorXd> Policy::b2() const { return {params_.data() + kB2, kHidden}; }
Eigen::Map<const Eigen::MatrixXd> Policy::w3() const { return {params_.data() + kW3, kOut, kHidden}; }
Eigen::Map<const Eigen::VectorXd> Policy::b3() const { return {params_.data() + kB3, kOut}; }

Policy Policy::init(std::uint64_t seed) {
  Policy p;
  Rng rng(Rng::derive(seed, 0x1417));
  auto fill = [&](double* data, std::size_t n, int fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < n; ++i) data[i] = rng.uniform(-s, s);
  };
  fill(p.params_.data() + kW1, kB1 - kW1, kIn);
  fill(p.params_.data() + kW2, kB2 - kW2, kHidden);
  fill(p.params_.data() + kW3, kB3 - kW3, kHidden);
  // biases stay zero
  return p;
}

Eigen::Vector2d Policy::forward_raw(const std::array<double, kObsDim>& obs) const {
  Eigen::Map<const Eigen::VectorXd> x(obs.data(), kIn);
  Eigen::VectorXd a1 = w1() * x + b1();
  if (tanh_hidden) a1 = a1.array().tanh();
  Eigen::VectorXd a2 = w2() * a1 + b2();
  if (tanh_hidden) a2 = a2.array().tanh();
  return w3() * a2 + b3();
}

Action Policy::act(const std::array<double, kObsDim>& obs,
                   const VehicleParams& vp) const {
  const Eigen::Vector2d raw = forward_raw(obs);
  return {vp.max_steer * std::tanh(raw[0]), vp.max_speed * sigmoid(raw[1])};
}

void Policy::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  f << "megapolicy v1\nlayers " << kIn << " " << kHidden << " " << kHidden
    << " " << kOut << "\nactivation tanh\ndata\n";
  std::vector<float> buf(kParamCount);
  for (std::size_t i = 0; i < kParamCount; ++i)
    buf[i] = static_cast<float>(params_[i]);
  f.write(reinterpret_cast<const char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Policy Policy::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint not found: " + path);
  std::string line;
  std::getline(f, line);
  if (line != "megapolicy v1")
    throw std::runtime_error("bad checkpoint format: " + path);
  std::getline(f, line);
  {
    std::stringstream ss(line);
    std::string tag;
    int a, b, c, d;
    ss >> tag >> a >> b >> c >> d;
    if (tag != "layers" || a != kIn || b != kHidden || c != kHidden || d != kOut)
      throw std::runtime_error("checkpoint layer shape mismatch: " + path);
  }
  std::getline(f, line);  // activation
  std::getline(f, line);  // data
  std::vector<float> buf(kParamCount);
  f.read(reinterpret_cast<char*>(buf.data()),
         static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!f) throw std::runtime_error("truncated checkpoint: " + path);
  Policy p;
  for (std::size_t i = 0; i < kParamCount; ++i) p.params_[i] = buf[i];
  return p;
}

std::array<double, kObsDim> downsample(const std::vector<double>& scan,
                                       double max_range) {
  if (scan.size() != 1080)
    throw std::invalid_argument("downsample: expected 1080 ranges");
  std::array<double, kObsDim> out{};
  for (int i = 0; i < kObsDim; ++i)
    out[i] = std::min(scan[static_cast<std::size_t>(10) * i], max_range) /
             max_range;
  return out;
}

double loss_and_gradient(const Policy& p, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& T, Eigen::VectorXd* grad) {
  const Eigen::Index B = X.rows();
  Eigen::MatrixXd a1 = (X * p.w1().transpose()).rowwise() + p.b1().transpose();
  if (p.tanh_hidden) a1 = a1.array().tanh();
  Eigen::MatrixXd a2 = (a1 * p.w2().transpose()).rowwise() + p.b2().transpose();
  if (p.tanh_hidden) a2 = a2.array().tanh();
  const Eigen::MatrixXd y = (a2 * p.w3().transpose()).rowwise() + p.b3().transpose();

  const Eigen::MatrixXd err = y - T;
  const double loss = err.squaredNorm() / static_cast<double>(err.size());

  if (grad) {
    grad->resize(static_cast<Eigen::Index>(Policy::kParamCount));
    Eigen::Map<Eigen::MatrixXd> gw1(grad->data() + kW1, Policy::kHidden, Policy::kIn);
    Eigen::Map<Eigen::VectorXd> gb1(grad->data() + kB1, Policy::kHidden);
    Eigen::Map<Eigen::MatrixXd> gw2(grad->data() + kW2, Policy::kHidden, Policy::kHidden);
    Eigen::Map<Eigen::VectorXd> gb2(grad->data() + kB2, Policy::kHidden);
    Eigen::Map<Eigen::MatrixXd> gw3(grad->data() + kW3, Policy::kOut, Policy::kHidden);
    Eigen::Map<Eigen::VectorXd> gb3(grad->data() + kB3, Policy::kOut);

    const Eigen::MatrixXd dy = err * (2.0 / static_cast<double>(err.size()));
    gw3 = dy.transpose() * a2;
    gb3 = dy.colwise().sum();
    Eigen::MatrixXd dz2 = dy * p.w3();
    if (p.tanh_hidden) dz2.array() *= 1.0 - a2.array().square();
    gw2 = dz2.transpose() * a1;
    gb2 = dz2.colwise().sum();
    Eigen::MatrixXd dz1 = dz2 * p.w2();
    if (p.tanh_hidden) dz1.array() *= 1.0 - a1.array().square();
    gw1 = dz1.transpose() * X;
    gb1 = dz1.colwise().sum();
  }
  (void)B;
  return loss;
}

Eigen::Vector2d action_to_target(const Action& a, const VehicleParams& vp) {
  const double s = std::clamp(a.steering / vp.max_steer, -1.0 + 1e-4, 1.0 - 1e-4);
  const double u = std::clamp(a.speed / vp.max_speed, 1e-4, 1.0 - 1e-4);
  return {std::atanh(s), std::log(u / (1.0 - u))};
}

TrainResult train(const Policy& p0, const Dataset& data, const TrainConfig& cfg,
                  const VehicleParams& vp) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  TrainResult res;
  res.policy = p0;
  if (cfg.epochs <= 0) return res;

  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd X(n, Policy::kIn), T(n, Policy::kOut);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (int c = 0; c < Policy::kIn; ++c) X(r, c) = data[r].obs[c];
    T.row(r) = action_to_target(data[r].action, vp).transpose();
  }

  Eigen::VectorXd m = Eigen::VectorXd::Zero(Policy::kParamCount);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Policy::kParamCount);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  Rng rng(Rng::derive(cfg.seed, 0x7124));
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);

  Eigen::VectorXd grad;
  int t = 0;
  double last_loss = 0.0;
  const int bs = std::max(1, cfg.batch_size);
  Eigen::MatrixXd xb, tb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // seeded Fisher-Yates shuffle
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const Eigen::Index j = static_cast<Eigen::Index>(
          rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[i], order[j]);
    }
    for (Eigen::Index start = 0; start < n; start += bs) {
      const Eigen::Index b = std::min<Eigen::Index>(bs, n - start);
      xb.resize(b, Policy::kIn);
      tb.resize(b, Policy::kOut);
      for (Eigen::Index r = 0; r < b; ++r) {
        xb.row(r) = X.row(order[start + r]);
        tb.row(r) = T.row(order[start + r]);
      }
      last_loss = loss_and_gradient(res.policy, xb, tb, &grad);
      if (!std::isfinite(last_loss))
        throw std::runtime_error("train: non-finite loss");
      ++t;
      m = beta1 * m + (1.0 - beta1) * grad;
      v = beta2 * v + (1.0 - beta2) * grad.array().square().matrix();
      const double bc1 = 1.0 - std::pow(beta1, t);
      const double bc2 = 1.0 - std::pow(beta2, t);
      res.policy.params().array() -=
          cfg.learning_rate * (m.array() / bc1) /
          ((v.array() / bc2).sqrt() + eps);
      if (cfg.max_updates > 0 && t >= cfg.max_updates) {
        res.final_loss = last_loss;
        res.updates = t;
        return res;
      }
    }
  }
  res.final_loss = last_loss;
  res.updates = t;
  return res;
}

double gradient_check(const Policy& p, const Eigen::MatrixXd& X,
                      const Eigen::MatrixXd& T, int n_params,
                      std::uint64_t seed) {
  Eigen::VectorXd grad;
  loss_and_gradient(p, X, T, &grad);
  Rng rng(Rng::derive(seed, 0x6D1F));
  Policy q = p;
  const double h = 1e-5;
  double max_rel = 0.0;
  for (int k = 0; k < n_params; ++k) {
    const std::size_t i = rng.uniform_int(Policy::kParamCount);
    const double orig = q.params()[static_cast<Eigen::Index>(i)];
    q.params()[static_cast<Eigen::Index>(i)] = orig + h;
    const double lp = loss_and_gradient(q, X, T, nullptr);
    q.params()[static_cast<Eigen::Index>(i)] = orig - h;
    const double lm = loss_and_gradient(q, X, T, nullptr);
    q.params()[static_cast<Eigen::Index>(i)] = orig;
    const double num = (lp - lm) / (2.0 * h);
    const double ana = grad[static_cast<Eigen::Index>(i)];
    const double rel =
        std::abs(num - ana) / std::max(1e-6, std::abs(num) + std::abs(ana));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace mega
