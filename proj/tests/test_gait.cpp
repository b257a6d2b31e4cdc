#include "cobra/sim/episode.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cobra;
using namespace cobra::gait;

namespace {

KuramotoParams single(double a, double R, double omega = 2.0 * kPi) {
  return KuramotoParams::uniform(1, a, 0.0, R, omega, 0.0);
}

/// r(t) from rest for the critically damped amplitude equation with a = 4.
double closed_form_r(double R, double a, double t) { return R * (1.0 - (1.0 + a * t / 2.0) * std::exp(-a * t / 2.0)); }

}  // namespace

TEST(SineGait, SidewindingDefaults) {
  const auto g = SineGaitParams::sidewinding(0.5);
  EXPECT_EQ(g.a_pitch_deg, 14.0);
  EXPECT_EQ(g.a_yaw_deg, 60.0);
  const double expected[] = {0, 0, 1, 1, 2, 2, 3, 3, 0, 0, 1};
  for (int j = 0; j < 11; ++j) EXPECT_DOUBLE_EQ(g.phase(j), expected[j] * kPi / 2.0);
}

TEST(SineGait, AmplitudesFollowAxes) {
  const auto g = SineGaitParams::sidewinding(0.5);
  const auto a = sine_amplitudes(g);
  for (int j = 0; j < 11; ++j) EXPECT_DOUBLE_EQ(a(j), deg2rad(j % 2 == 0 ? 14.0 : 60.0));
}

TEST(SineGait, ValuesAtZero) {
  auto g = SineGaitParams::sidewinding(0.5);
  const auto q = sine_reference(0.0, g);
  EXPECT_EQ(q(0), 0.0);
  EXPECT_EQ(q(1), 0.0);
  EXPECT_NEAR(q(2), deg2rad(14.0), 1e-15);
  EXPECT_NEAR(q(3), deg2rad(60.0), 1e-15);
  g.phase(5) = kPi / 2.0;
  EXPECT_NEAR(sine_reference(0.0, g)(5), 1.0472, 1e-4);
}

TEST(SineGait, Periodic) {
  const auto g = SineGaitParams::sidewinding(0.35);
  for (double t : {0.0, 0.7, 3.3, 11.1}) {
    EXPECT_LE((sine_reference(t, g) - sine_reference(t + g.period(), g)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SineGait, Validation) {
  auto g = SineGaitParams::sidewinding(0.5);
  g.omega = 0.0;
  EXPECT_THROW(validate(g), ConfigError);
  g = SineGaitParams::sidewinding(0.5);
  g.a_yaw_deg = -1.0;
  EXPECT_THROW(validate(g), ConfigError);
}

TEST(Kuramoto, CouplingMatrixRows) {
  auto p = KuramotoParams::uniform(4, 4.0, 0.0, 1.0, 1.0, 0.0);
  p.mu << 1, 2, 3, 4;
  const MatX A = coupling_matrix(p);
  MatX E(4, 4);
  E << -1, 1, 0, 0, 2, -4, 2, 0, 0, 3, -6, 3, 0, 0, 4, -4;
  EXPECT_EQ(A, E);
  const MatX B = shift_matrix(3);
  MatX EB(3, 2);
  EB << 1, 0, -1, 1, 0, -1;
  EXPECT_EQ(B, EB);
}

TEST(Kuramoto, EquilibriumAmplitudeStays) {
  const auto p = single(4.0, 0.7);
  KuramotoState s{VecX::Zero(1), VecX::Constant(1, 0.7), VecX::Zero(1)};
  for (int k = 0; k < 1000; ++k) kuramoto_step(s, p, 1e-3);
  EXPECT_NEAR(s.r(0), 0.7, 1e-14);
}

TEST(Kuramoto, UncoupledChannelDriftsAtOmegaPlusShift) {
  auto p = KuramotoParams::uniform(2, 4.0, 0.0, 1.0, 3.0, 0.5);
  KuramotoState s = KuramotoState::rest(2);
  for (int k = 0; k < 1000; ++k) kuramoto_step(s, p, 1e-3);
  EXPECT_NEAR(s.phi(0), 3.5, 1e-9);
  EXPECT_NEAR(s.phi(1), 2.5, 1e-9);
}

TEST(Kuramoto, AmplitudeMatchesCriticallyDampedClosedForm) {
  const double R = 1.3, a = 4.0, h = 1e-3;
  const auto p = single(a, R);
  KuramotoState s = KuramotoState::rest(1);
  double worst = 0.0, peak = 0.0, t_settle = -1.0;
  for (int k = 1; k <= 8000; ++k) {
    kuramoto_step(s, p, h);
    const double t = k * h;
    worst = std::max(worst, std::abs(s.r(0) - closed_form_r(R, a, t)));
    peak = std::max(peak, s.r(0));
    if (t_settle < 0 && std::abs(s.r(0) - R) < 0.01 * R) t_settle = t;
  }
  EXPECT_LE(worst, 1e-9);
  EXPECT_LE(peak, R + 1e-6);
  EXPECT_NEAR(t_settle, 3.32, 0.02);
}

TEST(Kuramoto, NoOvershootFromPartialAmplitude) {
  const auto p = single(4.0, 1.0);
  for (double r0 : {0.0, 0.3, 0.9}) {
    KuramotoState s{VecX::Zero(1), VecX::Constant(1, r0), VecX::Zero(1)};
    for (int k = 0; k < 10000; ++k) {
      kuramoto_step(s, p, 1e-3);
      ASSERT_LE(s.r(0), 1.0 + 1e-6);
    }
  }
}

TEST(Kuramoto, PhaseConsensusWithoutShifts) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.75);
  auto p = KuramotoParams::uniform(6, 4.0, 1.5, 1.0, 2.0, 0.0);
  KuramotoState s = KuramotoState::rest(6);
  for (Eigen::Index i = 0; i < 6; ++i) s.phi(i) = u(rng);
  // Slowest chain mode decays at 2 mu (1 - cos(pi/6)) ~ 0.4 per second.
  for (int k = 0; k < 60000; ++k) kuramoto_step(s, p, 1e-3);
  for (Eigen::Index i = 0; i + 1 < 6; ++i) EXPECT_NEAR(s.phi(i + 1) - s.phi(i), 0.0, 1e-6);
}

TEST(Kuramoto, SteadyStateOutputAmplitude) {
  auto [p, s] = sim::sidewinding_cpg(SineGaitParams::sidewinding(0.5));
  s.r.setZero();
  VecX lo = VecX::Constant(11, 1e9), hi = VecX::Constant(11, -1e9);
  for (int k = 0; k < 20000; ++k) {
    const VecX x = kuramoto_step(s, p, 1e-3);
    if (k >= 16000) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
  }
  for (Eigen::Index i = 0; i < 11; ++i) EXPECT_NEAR(0.5 * (hi(i) - lo(i)), p.R(i), 1e-3);
}

TEST(Kuramoto, LockedCpgReproducesSineGait) {
  const auto g = SineGaitParams::sidewinding(0.5);
  auto [p, s] = sim::sidewinding_cpg(g);
  sim::KuramotoGait cpg(p, s);
  for (double t = 0.0; t < 6.0; t += 0.01) EXPECT_LE((cpg(t) - sine_reference(t, g)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Kuramoto, Validation) {
  auto p = KuramotoParams::uniform(3, 4.0, 1.0, 1.0, 1.0, 0.0);
  p.a = 0.0;
  EXPECT_THROW(validate(p), ConfigError);
  p.a = 4.0;
  p.theta = VecX::Zero(3);
  EXPECT_THROW(validate(p), ConfigError);
  KuramotoState s = KuramotoState::rest(3);
  p.theta = VecX::Zero(2);
  EXPECT_THROW(kuramoto_step(s, p, 0.0), ConfigError);
}

TEST(Steer, ZeroErrorIsIdentityAndSignsMirror) {
  const auto p = KuramotoParams::uniform(11, 4.0, 1.0, 1.0, 1.0, 0.0);
  SteerSettings st;
  st.channels = {1, 3, 5};
  EXPECT_EQ(steer(p, 0.0, st).delta, p.delta);
  const auto a = steer(p, 0.3, st), b = steer(p, -0.3, st);
  EXPECT_EQ(a.delta, -b.delta);
  EXPECT_NEAR(a.delta(1), 0.15, 1e-15);
  EXPECT_EQ(a.delta(2), 0.0);
  EXPECT_NEAR(steer(p, 3.0, st).delta(1), st.max_offset, 1e-15);
  EXPECT_THROW(steer(p, 4.0, st), ConfigError);
}

TEST(Steer, ConstantErrorTurnsSameWay) {
  const auto g = SineGaitParams::sidewinding(0.5);
  robot::CobraConfig cfg;
  robot::Cobra c(cfg, SimParams{});
  auto [p, s] = sim::sidewinding_cpg(g);
  SteerSettings st;
  for (std::size_t j = 0; j < robot::kJointCount; ++j)
    if (cfg.joint_axes[j] == robot::JointAxis::Yaw) st.channels.push_back(j);
  sim::KuramotoGait cpg(steer(p, 0.3, st), s);
  auto axis = [&] {
    const Vec3 d = c.head().position - c.tail().position;
    return std::atan2(d.y(), d.x());
  };
  double turned = 0.0, prev = axis();
  for (int k = 1; k <= 2000; ++k) {
    sim::control_tick(c, cpg(k * 0.01), {});
    const double a = axis();
    turned += wrap_angle(a - prev);
    prev = a;
  }
  EXPECT_GT(turned, 0.0);
}
