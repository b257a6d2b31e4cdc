#pragma once

#include "cobra/errors.hpp"
#include "cobra/gait/sine_gait.hpp"
#include "cobra/sim/episode.hpp"
#include "cobra/sim/metrics.hpp"
#include "cobra/tuning/params.hpp"
#include "cobra/tuning/ppo.hpp"
#include "cobra/tuning/rewards.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cobra::tuning {

/// Reward assigned to rollouts that fail (solver breakdown, NaN, unfittable motion).
inline constexpr double kLargePenalty = 1e3;

struct Score {
  double r_internal = 0.0;
  double r_external = 0.0;
  bool ok = true;
  std::string diagnostic;

  double total() const { return r_internal + r_external; }
};

using Objective = std::function<Score(const SimParams&)>;

/// Reference data for model matching: a recorded trajectory, its joint fits and the gait that produced it.
struct Reference {
  sim::Trajectory trajectory;
  std::vector<CpgFit> fits;
  gait::SineGaitParams gait;
  robot::CobraConfig robot;
  sim::EpisodeSettings episode;
};

inline sim::Trajectory simulate(const SimParams& params, const robot::CobraConfig& cfg, const gait::SineGaitParams& g,
                                double duration, const sim::EpisodeSettings& es = {}, std::uint64_t seed = 0) {
  robot::Cobra c(cfg, params);
  return sim::run_episode(c, g, duration, seed, es);
}

inline Reference make_reference(sim::Trajectory tr, const gait::SineGaitParams& g, const robot::CobraConfig& cfg,
                                const sim::EpisodeSettings& es = {}) {
  Reference r;
  r.fits = fit_joints(tr);
  r.trajectory = std::move(tr);
  r.gait = g;
  r.robot = cfg;
  r.episode = es;
  return r;
}

inline Score failure_score(const std::string& why) {
  return {-kLargePenalty, -kLargePenalty, false, why};
}

/// Runs the reference gait with the given parameters and scores it against the reference.
inline Score rollout_and_score(const SimParams& params, const Reference& ref) {
  try {
    const auto tr = simulate(params, ref.robot, ref.gait, ref.trajectory.duration(), ref.episode);
    Score s;
    s.r_external = reward_external(ref.trajectory, tr);
    s.r_internal = reward_internal(ref.fits, fit_joints(tr));
    if (!std::isfinite(s.total())) return failure_score("non-finite reward");
    return s;
  } catch (const Error& e) {
    return failure_score(e.what());
  }
}

enum class TuneMethod { Ppo, Random, Cem };

inline TuneMethod parse_method(const std::string& s) {
  if (s == "ppo") return TuneMethod::Ppo;
  if (s == "random") return TuneMethod::Random;
  if (s == "cem") return TuneMethod::Cem;
  throw ConfigError("unknown tuning method '" + s + "' (expected ppo, random or cem)");
}

inline std::string to_string(TuneMethod m) {
  switch (m) {
    case TuneMethod::Ppo: return "ppo";
    case TuneMethod::Random: return "random";
    case TuneMethod::Cem: return "cem";
  }
  return "?";
}

struct TuneSettings {
  TuneMethod method = TuneMethod::Ppo;
  int budget = 500;  // rollouts
  std::uint64_t seed = 1;
  int horizon = 8;
  int batch = 16;          // rollouts per PPO update
  double delta_max = 0.1;  // normalized action bound
  double init_std = 0.05;
  int hidden = 64;
  PpoHyper hyper;
  int cem_population = 16;
  int cem_elite = 4;
  double cem_init_std = 0.15;
  double cem_min_std = 0.01;
};

inline void validate(const TuneSettings& s) {
  if (s.budget < 1) throw ConfigError("tuning budget must be >= 1");
  if (s.horizon < 1 || s.batch < 1) throw ConfigError("horizon and batch must be >= 1");
  if (!(s.delta_max > 0.0) || !(s.init_std > 0.0)) throw ConfigError("delta_max and init_std must be > 0");
  if (s.cem_population < 2 || s.cem_elite < 1 || s.cem_elite > s.cem_population)
    throw ConfigError("CEM needs population >= 2 and 1 <= elite <= population");
  validate(s.hyper);
}

struct EpisodeRecord {
  int index = 0;
  SimParams params;
  Score score;
  double best_total = 0.0;
};

struct TuneResult {
  SimParams best;
  Score best_score;
  std::vector<EpisodeRecord> episodes;
  std::vector<PpoStats> updates;

  std::vector<double> reward_curve() const {
    std::vector<double> r;
    for (const auto& e : episodes) r.push_back(e.score.total());
    return r;
  }
  std::vector<double> best_curve() const {
    std::vector<double> r;
    for (const auto& e : episodes) r.push_back(e.best_total);
    return r;
  }
};

/// Called after every rollout; returning false stops tuning with the results so far.
using TuneCallback = std::function<bool(const EpisodeRecord&)>;

namespace detail {

class Recorder {
 public:
  Recorder(const Objective& f, const ParamBounds& b, int budget, TuneResult& out, const TuneCallback& cb)
      : f_(f), b_(b), budget_(budget), out_(out), cb_(cb) {}

  bool exhausted() const { return stopped_ || static_cast<int>(out_.episodes.size()) >= budget_; }

  Score evaluate(const ParamVector& x) {
    const SimParams p = denormalize(clamp_unit(x), b_);
    const Score s = f_(p);
    if (out_.episodes.empty() || s.total() > out_.best_score.total()) {
      out_.best = p;
      out_.best_score = s;
      best_x_ = clamp_unit(x);
    }
    EpisodeRecord r{static_cast<int>(out_.episodes.size()), p, s, out_.best_score.total()};
    out_.episodes.push_back(r);
    if (cb_ && !cb_(r)) stopped_ = true;
    return s;
  }

  const ParamVector& best_x() const { return best_x_; }

 private:
  const Objective& f_;
  const ParamBounds& b_;
  int budget_;
  TuneResult& out_;
  const TuneCallback& cb_;
  ParamVector best_x_ = ParamVector::Zero();
  bool stopped_ = false;
};

inline void tune_random(Recorder& rec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (!rec.exhausted()) {
    ParamVector x;
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = u(rng);
    rec.evaluate(x);
  }
}

inline void tune_cem(Recorder& rec, const ParamVector& x0, const TuneSettings& s, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ParamVector mean = x0;
  ParamVector sd = ParamVector::Constant(s.cem_init_std);
  while (!rec.exhausted()) {
    std::vector<std::pair<double, ParamVector>> pop;
    for (int k = 0; k < s.cem_population && !rec.exhausted(); ++k) {
      ParamVector x;
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = mean(i) + sd(i) * n(rng);
      x = clamp_unit(x);
      pop.emplace_back(rec.evaluate(x).total(), x);
    }
    if (static_cast<int>(pop.size()) < s.cem_elite) break;
    std::stable_sort(pop.begin(), pop.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    mean.setZero();
    for (int k = 0; k < s.cem_elite; ++k) mean += pop[k].second;
    mean /= s.cem_elite;
    ParamVector var = ParamVector::Zero();
    for (int k = 0; k < s.cem_elite; ++k) var += (pop[k].second - mean).cwiseAbs2();
    sd = (var / s.cem_elite).cwiseSqrt().cwiseMax(s.cem_min_std);
  }
}

/// PPO over parameter space. Each MDP episode starts at the incumbent best parameters and takes
/// `horizon` bounded steps; every step is one scored rollout.
inline void tune_ppo(Recorder& rec, const ParamVector& x0, const TuneSettings& s, std::mt19937_64& rng,
                     TuneResult& out) {
  constexpr int n = static_cast<int>(kParamCount);
  PpoAgent agent(n, n, s.hidden, s.init_std, s.hyper, rng);
  rec.evaluate(x0);
  while (!rec.exhausted()) {
    std::vector<TuningEpisode> batch;
    int collected = 0;
    while (collected < s.batch && !rec.exhausted()) {
      TuningEpisode ep;
      VecX state = rec.best_x();
      for (int t = 0; t < s.horizon && collected < s.batch && !rec.exhausted(); ++t) {
        const VecX a = agent.policy.sample(state, rng);
        const double lp = agent.policy.log_prob(state, a);
        const ParamVector step = a.cwiseMax(-s.delta_max).cwiseMin(s.delta_max);
        const ParamVector next = clamp_unit(ParamVector(state) + step);
        const Score sc = rec.evaluate(next);
        ep.push_back({state, a, sc.total(), next, lp});
        state = next;
        ++collected;
      }
      batch.push_back(std::move(ep));
    }
    if (collected > 0) out.updates.push_back(ppo_update(agent, batch, s.hyper));
  }
}

}  // namespace detail

/// Searches parameter space for the best-scoring SimParams. All methods share the objective and
/// count every objective call against the budget.
inline TuneResult tune(const Objective& objective, const SimParams& initial, const ParamBounds& bounds,
                       const TuneSettings& s, const TuneCallback& callback = {}) {
  validate(s);
  validate(bounds);
  TuneResult out;
  detail::Recorder rec(objective, bounds, s.budget, out, callback);
  std::mt19937_64 rng(s.seed);
  const ParamVector x0 = clamp_unit(normalize(clamp(initial, bounds), bounds));
  switch (s.method) {
    case TuneMethod::Random: detail::tune_random(rec, rng); break;
    case TuneMethod::Cem: detail::tune_cem(rec, x0, s, rng); break;
    case TuneMethod::Ppo: detail::tune_ppo(rec, x0, s, rng, out); break;
  }
  return out;
}

inline Objective reference_objective(const Reference& ref) {
  return [&ref](const SimParams& p) { return rollout_and_score(p, ref); };
}

}  // namespace cobra::tuning
