#pragma once

#include "cobra/errors.hpp"
#include "cobra/tuning/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace cobra::tuning {

/// One (S_t, A_t, R_t, S_t+1) record plus the behavior policy's log-probability of A_t.
struct TuningTransition {
  VecX state;
  VecX action;
  double reward = 0.0;
  VecX next_state;
  double log_prob = 0.0;
};

using TuningEpisode = std::vector<TuningTransition>;

struct PpoHyper {
  double clip_eps = 0.2;
  double gamma = 0.99;
  double learning_rate = 3e-4;
  double value_learning_rate = 3e-4;
  int epochs = 10;
};

inline void validate(const PpoHyper& h) {
  if (!(h.clip_eps > 0.0 && h.clip_eps < 1.0)) throw ConfigError("clip epsilon must lie in (0, 1)");
  if (!(h.gamma > 0.0 && h.gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(h.learning_rate > 0.0) || !(h.value_learning_rate > 0.0)) throw ConfigError("learning rates must be > 0");
  if (h.epochs < 1) throw ConfigError("epochs must be >= 1");
}

inline double clipped_objective(double ratio, double advantage, double eps) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage);
}

inline std::vector<double> rewards_to_go(const std::vector<double>& rewards, double gamma) {
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    out[i] = acc;
  }
  return out;
}

struct SurrogateSample {
  VecX state;
  VecX action;
  double log_prob_old = 0.0;
  double advantage = 0.0;
};

/// Mean clipped surrogate over the samples; its gradient w.r.t. the policy parameters goes to grad when given.
inline double clipped_surrogate(const GaussianPolicy& policy, const std::vector<SurrogateSample>& samples, double eps,
                                VecX* grad = nullptr) {
  if (samples.empty()) throw ConfigError("surrogate needs at least one sample");
  if (grad) *grad = VecX::Zero(policy.parameter_count());
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  double total = 0.0;
  for (const auto& s : samples) {
    const double lp = policy.log_prob(s.state, s.action);
    const double ratio = std::exp(lp - s.log_prob_old);
    const double unclipped = ratio * s.advantage;
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * s.advantage;
    total += std::min(unclipped, clipped);
    // The clipped branch is constant in the parameters.
    if (grad && unclipped <= clipped) policy.log_prob_grad(s.state, s.action, inv_n * s.advantage * ratio, *grad);
  }
  return total * inv_n;
}

struct PpoAgent {
  GaussianPolicy policy;
  Mlp value;
  Adam policy_opt;
  Adam value_opt;

  PpoAgent() = default;

  PpoAgent(int state_size, int action_size, int hidden, double init_std, const PpoHyper& h, std::mt19937_64& rng)
      : policy_opt(h.learning_rate), value_opt(h.value_learning_rate) {
    Mlp mean({state_size, hidden, hidden, action_size});
    mean.init(rng, 0.01);
    policy = GaussianPolicy(std::move(mean), init_std);
    value = Mlp({state_size, hidden, hidden, 1});
    value.init(rng, 1.0);
  }
};

struct PpoStats {
  double surrogate_before = 0.0;
  double surrogate_after = 0.0;
  double value_loss = 0.0;
  std::size_t samples = 0;
};

inline void check_finite(const VecX& g, const char* what, std::size_t batch) {
  if (!g.allFinite())
    throw Error(std::string("NaN in ") + what + " gradient (batch of " + std::to_string(batch) + " transitions)");
}

/// Rewards-to-go, value-baselined advantages normalized per batch, then K epochs of clipped-surrogate
/// ascent and value regression.
inline PpoStats ppo_update(PpoAgent& agent, const std::vector<TuningEpisode>& batch, const PpoHyper& h) {
  validate(h);
  std::vector<SurrogateSample> samples;
  std::vector<double> targets;
  for (const auto& ep : batch) {
    std::vector<double> r;
    for (const auto& t : ep) r.push_back(t.reward);
    const auto rtg = rewards_to_go(r, h.gamma);
    for (std::size_t i = 0; i < ep.size(); ++i) {
      samples.push_back({ep[i].state, ep[i].action, ep[i].log_prob, 0.0});
      targets.push_back(rtg[i]);
    }
  }
  if (samples.empty()) throw ConfigError("PPO batch is empty");
  const std::size_t n = samples.size();

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    samples[i].advantage = targets[i] - agent.value.forward(samples[i].state)(0);
    mean += samples[i].advantage;
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& s : samples) var += (s.advantage - mean) * (s.advantage - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (auto& s : samples) s.advantage = sd > 1e-12 ? (s.advantage - mean) / sd : s.advantage - mean;

  PpoStats st;
  st.samples = n;
  VecX theta = agent.policy.parameters();
  VecX grad;
  st.surrogate_before = clipped_surrogate(agent.policy, samples, h.clip_eps);
  for (int k = 0; k < h.epochs; ++k) {
    clipped_surrogate(agent.policy, samples, h.clip_eps, &grad);
    check_finite(grad, "policy", n);
    VecX neg = -grad;  // ascent
    agent.policy_opt.step(theta, neg);
    agent.policy.set_parameters(theta);
  }
  st.surrogate_after = clipped_surrogate(agent.policy, samples, h.clip_eps);

  VecX phi = agent.value.parameters();
  for (int k = 0; k < h.epochs; ++k) {
    VecX g = VecX::Zero(phi.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Mlp::Cache cache;
      const double v = agent.value.forward(samples[i].state, &cache)(0);
      const double e = v - targets[i];
      loss += e * e;
      agent.value.backward(cache, VecX::Constant(1, 2.0 * e / static_cast<double>(n)), g);
    }
    check_finite(g, "value", n);
    st.value_loss = loss / static_cast<double>(n);
    agent.value_opt.step(phi, g);
    agent.value.set_parameters(phi);
  }
  return st;
}

}  // namespace cobra::tuning
