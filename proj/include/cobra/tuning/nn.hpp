#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/math.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace cobra::tuning {

/// Fully connected network with tanh hidden layers and a linear output layer.
class Mlp {
 public:
  struct Cache {
    std::vector<VecX> activations;  // input, then each layer's output
  };

  Mlp() = default;

  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ConfigError("network needs input and output sizes");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      W_.emplace_back(MatX::Zero(sizes_[l + 1], sizes_[l]));
      b_.emplace_back(VecX::Zero(sizes_[l + 1]));
    }
  }

  /// Glorot-uniform weights, zero biases; the output layer is scaled by out_scale.
  void init(std::mt19937_64& rng, double out_scale = 1.0) {
    for (std::size_t l = 0; l < W_.size(); ++l) {
      const double lim = std::sqrt(6.0 / (W_[l].rows() + W_[l].cols()));
      std::uniform_real_distribution<double> u(-lim, lim);
      const double s = l + 1 == W_.size() ? out_scale : 1.0;
      for (Eigen::Index i = 0; i < W_[l].size(); ++i) W_[l].data()[i] = s * u(rng);
      b_[l].setZero();
    }
  }

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) n += W_[l].size() + b_[l].size();
    return n;
  }

  VecX parameters() const {
    VecX p(parameter_count());
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) {
      p.segment(k, W_[l].size()) = Eigen::Map<const VecX>(W_[l].data(), W_[l].size());
      k += W_[l].size();
      p.segment(k, b_[l].size()) = b_[l];
      k += b_[l].size();
    }
    return p;
  }

  void set_parameters(const VecX& p) {
    if (p.size() != parameter_count()) throw ConfigError("parameter vector has the wrong size");
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) {
      Eigen::Map<VecX>(W_[l].data(), W_[l].size()) = p.segment(k, W_[l].size());
      k += W_[l].size();
      b_[l] = p.segment(k, b_[l].size());
      k += b_[l].size();
    }
  }

  VecX forward(const VecX& x, Cache* cache = nullptr) const {
    VecX a = x;
    if (cache) {
      cache->activations.clear();
      cache->activations.push_back(a);
    }
    for (std::size_t l = 0; l < W_.size(); ++l) {
      VecX z = W_[l] * a + b_[l];
      a = l + 1 == W_.size() ? z : VecX(z.array().tanh());
      if (cache) cache->activations.push_back(a);
    }
    return a;
  }

  /// Adds d(grad_out . y)/d(params) to grad, where y was produced by the forward pass in cache.
  void backward(const Cache& cache, const VecX& grad_out, VecX& grad) const {
    VecX delta = grad_out;
    std::vector<Eigen::Index> offsets(W_.size());
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) {
      offsets[l] = k;
      k += W_[l].size() + b_[l].size();
    }
    for (std::size_t l = W_.size(); l-- > 0;) {
      if (l + 1 != W_.size()) {
        const VecX& y = cache.activations[l + 1];
        delta = (delta.array() * (1.0 - y.array().square())).matrix();
      }
      const VecX& in = cache.activations[l];
      const MatX gW = delta * in.transpose();
      grad.segment(offsets[l], W_[l].size()) += Eigen::Map<const VecX>(gW.data(), gW.size());
      grad.segment(offsets[l] + W_[l].size(), b_[l].size()) += delta;
      if (l > 0) delta = W_[l].transpose() * delta;
    }
  }

 private:
  std::vector<int> sizes_;
  std::vector<MatX> W_;
  std::vector<VecX> b_;
};

/// Diagonal Gaussian policy: mean from an MLP, state-independent log standard deviations.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(Mlp mean, double init_std) : mean_(std::move(mean)) {
    if (!(init_std > 0.0)) throw ConfigError("policy std must be > 0");
    log_std_ = VecX::Constant(mean_.output_size(), std::log(init_std));
  }

  const Mlp& mean_net() const { return mean_; }
  int action_size() const { return mean_.output_size(); }
  VecX std_dev() const { return log_std_.array().exp(); }

  Eigen::Index parameter_count() const { return mean_.parameter_count() + log_std_.size(); }

  VecX parameters() const {
    VecX p(parameter_count());
    p << mean_.parameters(), log_std_;
    return p;
  }

  void set_parameters(const VecX& p) {
    if (p.size() != parameter_count()) throw ConfigError("policy parameter vector has the wrong size");
    mean_.set_parameters(p.head(mean_.parameter_count()));
    log_std_ = p.tail(log_std_.size());
  }

  VecX mean(const VecX& s) const { return mean_.forward(s); }

  VecX sample(const VecX& s, std::mt19937_64& rng) const {
    std::normal_distribution<double> n(0.0, 1.0);
    VecX a = mean(s);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += std::exp(log_std_(i)) * n(rng);
    return a;
  }

  double log_prob(const VecX& s, const VecX& a) const {
    const VecX m = mean(s);
    double lp = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double z = (a(i) - m(i)) * std::exp(-log_std_(i));
      lp += -0.5 * z * z - log_std_(i) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    return lp;
  }

  /// log pi(a|s) and, scaled by `scale`, its gradient added to grad.
  double log_prob_grad(const VecX& s, const VecX& a, double scale, VecX& grad) const {
    Mlp::Cache cache;
    const VecX m = mean_.forward(s, &cache);
    VecX g_mean(m.size());
    double lp = 0.0;
    const Eigen::Index off = mean_.parameter_count();
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double inv = std::exp(-log_std_(i));
      const double z = (a(i) - m(i)) * inv;
      lp += -0.5 * z * z - log_std_(i) - 0.5 * std::log(2.0 * std::numbers::pi);
      g_mean(i) = scale * z * inv;
      grad(off + i) += scale * (z * z - 1.0);
    }
    mean_.backward(cache, g_mean, grad);
    return lp;
  }

 private:
  Mlp mean_;
  VecX log_std_;
};

/// Adaptive-moment optimizer on a flat parameter vector (minimizes).
class Adam {
 public:
  explicit Adam(double lr = 3e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(VecX& params, const VecX& grad) {
    if (m_.size() != params.size()) {
      m_ = VecX::Zero(params.size());
      v_ = VecX::Zero(params.size());
      t_ = 0;
    }
    ++t_;
    m_ = b1_ * m_ + (1.0 - b1_) * grad;
    v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1_, t_), c2 = 1.0 - std::pow(b2_, t_);
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

  double learning_rate() const { return lr_; }

 private:
  double lr_, b1_, b2_, eps_;
  VecX m_, v_;
  int t_ = 0;
};

}  // namespace cobra::tuning
