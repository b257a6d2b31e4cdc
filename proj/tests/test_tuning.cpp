#include "cobra/tuning/tuner.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cobra;
using namespace cobra::tuning;

namespace {

sim::Trajectory endpoint(double x, double y) {
  sim::Trajectory tr;
  tr.dt = 0.01;
  for (int i = 0; i < 3; ++i) {
    sim::TrajectorySample s;
    s.t = 0.01 * i;
    if (i == 2) s.head = Vec3(x, y, 0.0);
    tr.samples.push_back(s);
  }
  return tr;
}

std::vector<double> sine(double a, double w, double phi, double dt, std::size_t n) {
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = a * std::sin(w * dt * static_cast<double>(i) + phi);
  return q;
}

/// Quadratic bowl in normalized coordinates around a fixed point.
Objective bowl(const ParamBounds& b, const ParamVector& centre) {
  return [b, centre](const SimParams& p) {
    Score s;
    s.r_external = -(normalize(p, b) - centre).squaredNorm();
    return s;
  };
}

}  // namespace

TEST(Rewards, External) {
  EXPECT_NEAR(reward_external(endpoint(0, 0), endpoint(1, 1)), -std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(reward_external(endpoint(0, 0), endpoint(3, 4)), -5.0, 1e-15);
  EXPECT_EQ(reward_external(endpoint(2, 2), endpoint(2, 2)), 0.0);
  EXPECT_THROW(reward_external(endpoint(0, 0), sim::Trajectory{}), LengthMismatch);
}

TEST(Rewards, Internal) {
  std::vector<CpgFit> a(11), b(11);
  b[0].amplitude = 0.1;
  EXPECT_NEAR(reward_internal(a, b), -0.01, 1e-15);
  b[3].omega = 0.3;
  b[5].phase = 0.2;
  EXPECT_NEAR(reward_internal(a, b), -0.14, 1e-15);
  b.assign(11, CpgFit{});
  a[1].phase = kPi - 0.05;
  b[1].phase = -kPi + 0.05;
  EXPECT_NEAR(reward_internal(a, b), -0.01, 1e-12);
}

TEST(FitCpg, RecoversSyntheticSine) {
  const double dt = 0.01;
  const auto q = sine(1.0472, kPi, kPi / 2, dt, 1001);
  const auto f = fit_cpg(q, dt);
  EXPECT_NEAR(f.amplitude, 1.0472, 1e-3);
  EXPECT_NEAR(f.omega, kPi, 1e-3);
  EXPECT_NEAR(f.phase, kPi / 2, 1e-3);
  EXPECT_LT(f.residual_ratio, 1e-6);
}

TEST(FitCpg, NoisySineAmplitude) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 0.01);
  auto q = sine(0.8, 2.2, -1.0, 0.01, 1001);
  for (double& v : q) v += n(rng);
  EXPECT_NEAR(fit_cpg(q, 0.01).amplitude, 0.8, 0.02 * 0.8);
}

TEST(FitCpg, Failures) {
  EXPECT_THROW(fit_cpg(std::vector<double>(100, 0.0), 0.01), FitFailure);
  EXPECT_THROW(fit_cpg(std::vector<double>(5, 1.0), 0.01), FitFailure);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> noise(500);
  for (double& v : noise) v = n(rng);
  EXPECT_THROW(fit_cpg(noise, 0.01), FitFailure);
}

TEST(Ppo, ClippedObjectiveCases) {
  EXPECT_DOUBLE_EQ(clipped_objective(1.5, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(clipped_objective(0.5, -1.0, 0.2), -0.8);
  EXPECT_DOUBLE_EQ(clipped_objective(1.1, 2.0, 0.2), 2.2);
  EXPECT_DOUBLE_EQ(clipped_objective(0.5, 1.0, 0.2), 0.5);
}

TEST(Ppo, RewardsToGo) {
  const auto g = rewards_to_go({1.0, 2.0, 3.0}, 0.5);
  EXPECT_DOUBLE_EQ(g[2], 3.0);
  EXPECT_DOUBLE_EQ(g[1], 3.5);
  EXPECT_DOUBLE_EQ(g[0], 2.75);
}

namespace {

struct ToyProblem {
  GaussianPolicy policy;
  std::vector<SurrogateSample> samples;

  explicit ToyProblem(std::uint64_t seed, bool zero_advantage = false) {
    std::mt19937_64 rng(seed);
    Mlp m({3, 2});
    m.init(rng);
    policy = GaussianPolicy(m, 0.3);
    std::normal_distribution<double> n;
    for (int i = 0; i < 6; ++i) {
      SurrogateSample s;
      s.state = VecX::Random(3);
      s.action = policy.sample(s.state, rng);
      s.log_prob_old = policy.log_prob(s.state, s.action) + 0.05 * n(rng);
      s.advantage = zero_advantage ? 0.0 : n(rng);
      samples.push_back(s);
    }
  }
};

}  // namespace

TEST(Ppo, SurrogateAtRatioOneIsMeanAdvantage) {
  ToyProblem t(3);
  double mean = 0.0;
  for (auto& s : t.samples) {
    s.log_prob_old = t.policy.log_prob(s.state, s.action);
    mean += s.advantage / 6.0;
  }
  EXPECT_NEAR(clipped_surrogate(t.policy, t.samples, 0.2), mean, 1e-12);
}

TEST(Ppo, SurrogateGradientMatchesFiniteDifference) {
  ToyProblem t(4);
  ASSERT_EQ(t.policy.parameter_count(), 10);
  VecX grad;
  clipped_surrogate(t.policy, t.samples, 0.2, &grad);
  const VecX theta = t.policy.parameters();
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    GaussianPolicy p = t.policy;
    VecX tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    p.set_parameters(tp);
    const double fp = clipped_surrogate(p, t.samples, 0.2);
    p.set_parameters(tm);
    const double fm = clipped_surrogate(p, t.samples, 0.2);
    const double fd = (fp - fm) / (2 * h);
    EXPECT_LE(std::abs(grad(i) - fd), 1e-4 * std::max(1.0, std::abs(fd))) << i;
  }
}

TEST(Ppo, ZeroAdvantageGivesZeroGradient) {
  ToyProblem t(5, true);
  VecX grad;
  EXPECT_EQ(clipped_surrogate(t.policy, t.samples, 0.2, &grad), 0.0);
  EXPECT_EQ(grad.norm(), 0.0);
}

TEST(Params, NormalizeRoundTrip) {
  const ParamBounds b;
  SimParams p;
  const SimParams back = denormalize(normalize(p, b), b);
  for (std::size_t i = 0; i < kParamCount; ++i) EXPECT_NEAR(back[i], p[i], 1e-12 * p[i]);
  EXPECT_EQ(normalize(b.lo, b), ParamVector::Zero());
  EXPECT_LE((normalize(b.hi, b) - ParamVector::Ones()).norm(), 1e-12);
}

TEST(Params, MismatchScalesFrictionAndTorque) {
  const SimParams p;
  const SimParams m = apply_mismatch(p, Mismatch{});
  EXPECT_DOUBLE_EQ(m.mu_c, 3 * p.mu_c);
  EXPECT_DOUBLE_EQ(m.mu_s, 3 * p.mu_s);
  EXPECT_DOUBLE_EQ(m.mu_v, 3 * p.mu_v);
  EXPECT_DOUBLE_EQ(m.k_t, 2 * p.k_t);
  EXPECT_EQ(m.k1, p.k1);
}

TEST(Tune, BestCurveIsMonotoneForEveryMethod) {
  const ParamBounds b;
  const auto f = bowl(b, ParamVector::Constant(0.3));
  for (auto m : {TuneMethod::Random, TuneMethod::Cem, TuneMethod::Ppo}) {
    TuneSettings s;
    s.method = m;
    s.budget = 64;
    s.hidden = 8;
    const auto r = tune(f, SimParams{}, b, s);
    ASSERT_EQ(r.episodes.size(), 64u) << to_string(m);
    const auto best = r.best_curve();
    for (std::size_t i = 1; i < best.size(); ++i) EXPECT_GE(best[i], best[i - 1]);
    EXPECT_EQ(best.back(), r.best_score.total());
  }
}

TEST(Tune, ReproducibleWithSeed) {
  const ParamBounds b;
  const auto f = bowl(b, ParamVector::Constant(0.6));
  TuneSettings s;
  s.budget = 40;
  s.hidden = 8;
  s.seed = 9;
  EXPECT_EQ(tune(f, SimParams{}, b, s).reward_curve(), tune(f, SimParams{}, b, s).reward_curve());
}

TEST(Tune, SearchImprovesOnBowl) {
  const ParamBounds b;
  const auto f = bowl(b, ParamVector::Constant(0.7));
  TuneSettings s;
  s.method = TuneMethod::Cem;
  s.budget = 200;
  const auto r = tune(f, SimParams{}, b, s);
  EXPECT_GT(r.best_score.total(), r.episodes.front().score.total());
  EXPECT_GT(r.best_score.total(), -0.05);
}

TEST(Tune, FailuresScoreTheSentinelAndCallbackStops) {
  const ParamBounds b;
  const Objective f = [](const SimParams&) { return failure_score("boom"); };
  TuneSettings s;
  s.method = TuneMethod::Random;
  s.budget = 10;
  int calls = 0;
  const auto r = tune(f, SimParams{}, b, s, [&](const EpisodeRecord&) { return ++calls < 4; });
  EXPECT_EQ(r.episodes.size(), 4u);
  for (const auto& e : r.episodes) {
    EXPECT_FALSE(e.score.ok);
    EXPECT_EQ(e.score.total(), -2 * kLargePenalty);
  }
}

TEST(Tune, ParseMethod) {
  EXPECT_EQ(parse_method("ppo"), TuneMethod::Ppo);
  EXPECT_EQ(parse_method("cem"), TuneMethod::Cem);
  EXPECT_EQ(parse_method("random"), TuneMethod::Random);
  EXPECT_THROW(parse_method("sgd"), ConfigError);
}

TEST(Rollout, HiddenParametersReproduceTheReference) {
  const auto g = gait::SineGaitParams::sidewinding(0.5);
  const robot::CobraConfig cfg;
  const SimParams hidden = apply_mismatch(SimParams{}, Mismatch{});
  const auto ref = make_reference(simulate(hidden, cfg, g, 4.0), g, cfg);
  const Score same = rollout_and_score(hidden, ref);
  EXPECT_TRUE(same.ok);
  EXPECT_LT(std::abs(same.r_external), 0.02);
  SimParams off = hidden;
  off.mu_s *= 5.0;
  EXPECT_LT(rollout_and_score(off, ref).total(), same.total());
}
