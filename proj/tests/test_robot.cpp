#include "cobra/sim/episode.hpp"

#include <gtest/gtest.h>

using namespace cobra;
using namespace cobra::robot;

namespace {

/// Step response of one joint of a floating chain (no gravity, no ground).
std::vector<double> step_response(SimParams p, double kp, double target, int ticks = 200, std::size_t joint = 5) {
  CobraConfig cfg;
  cfg.servo.kp = kp;
  Cobra c(cfg, p);
  c.world().ground_enabled = false;
  c.world().gravity.setZero();
  JointVector ref = JointVector::Zero();
  ref(static_cast<Eigen::Index>(joint)) = target;
  std::vector<double> q;
  for (int k = 0; k < ticks; ++k) {
    sim::control_tick(c, ref, {});
    q.push_back(c.joint_angles()(static_cast<Eigen::Index>(joint)));
  }
  return q;
}

double overshoot(const std::vector<double>& q, double target) {
  double m = 0.0;
  for (double x : q) m = std::max(m, x - target);
  return m;
}

/// Ticks until the response first reaches half the target.
double half_rise(const std::vector<double>& q, double target) {
  for (std::size_t k = 0; k < q.size(); ++k)
    if (q[k] >= 0.5 * target) return static_cast<double>(k);
  return 1e9;
}

}  // namespace

TEST(CobraConfig, AxesAlternateStartingWithPitch) {
  const auto axes = CobraConfig::default_axes();
  ASSERT_EQ(axes.size(), kJointCount);
  int pitch = 0;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    pitch += axes[j] == JointAxis::Pitch;
    if (j + 1 < kJointCount) {
      EXPECT_NEAR(axis_vector(axes[j]).dot(axis_vector(axes[j + 1])), 0.0, 0.0);
    }
  }
  EXPECT_EQ(pitch, 6);
}

TEST(CobraConfig, RejectsNonAlternatingAxes) {
  CobraConfig cfg;
  cfg.joint_axes[3] = cfg.joint_axes[4];
  EXPECT_THROW(Cobra(cfg, SimParams{}), ConfigError);
  cfg = {};
  cfg.link_mass[2] = 0.0;
  EXPECT_THROW(Cobra(cfg, SimParams{}), ConfigError);
}

TEST(Cobra, BuildsStraightChain) {
  Cobra c(CobraConfig{}, SimParams{});
  EXPECT_EQ(c.world().bodies().size(), kLinkCount);
  EXPECT_EQ(c.world().joints().size(), kJointCount);
  EXPECT_EQ(c.world().assemble_constraints(1e-3).size(), 55u);
  EXPECT_EQ(c.joint_angles(), JointVector::Zero());
  EXPECT_DOUBLE_EQ(c.total_mass(), 12 * 0.4);
}

TEST(Cobra, SpawnPlacesHead) {
  CobraConfig cfg;
  cfg.spawn = Vec3(1.0, 2.0, 0.5);
  Cobra c(cfg, SimParams{});
  const auto s = c.partition_state();
  EXPECT_NEAR(s.head_position.x(), 1.0, 1e-12);
  EXPECT_NEAR(s.head_position.y(), 2.0, 1e-12);
  EXPECT_NEAR(c.forward().x(), std::cos(0.5), 1e-12);
}

TEST(Cobra, ImposedAnglesReadBack) {
  Cobra c(CobraConfig{}, SimParams{});
  JointVector q;
  for (Eigen::Index j = 0; j < q.size(); ++j) q(j) = (j % 3 - 1) * (kPi - 0.1) * (j + 1) / 11.0;
  c.impose_joint_angles(q);
  EXPECT_LE((c.joint_angles() - q).cwiseAbs().maxCoeff(), 1e-9);
  JointVector one = JointVector::Zero();
  one(0) = 0.1;
  c.impose_joint_angles(one);
  EXPECT_NEAR(c.joint_angles()(0), 0.1, 1e-9);
}

TEST(Actuator, ZeroErrorGivesZeroTorque) {
  EXPECT_EQ(actuator_torque(0.3, 0.0, {0.3}, ActuatorParams{}, ServoGains{}), 0.0);
}

TEST(Actuator, SaturatesThenSubtractsDamping) {
  ActuatorParams p;
  p.u_max = 1.0;
  p.b_m = 0.5;
  EXPECT_DOUBLE_EQ(actuator_torque(0.0, 2.0, {10.0}, p, ServoGains{}), 1.0 - 1.0);
  EXPECT_DOUBLE_EQ(actuator_torque(0.0, 0.0, {0.01}, p, {10.0, 0.3}), 0.1);
}

TEST(Actuator, Validation) {
  ActuatorParams p;
  p.j_m = 0.0;
  EXPECT_THROW(validate(p), ConfigError);
  p = {};
  p.k_t = -1.0;
  EXPECT_THROW(validate(p), ConfigError);
}

TEST(Servo, StepConvergesWithStiffGains) {
  const auto q = step_response(SimParams{}, 50.0, 0.3, 300);
  EXPECT_NEAR(q.back(), 0.3, 5e-3);
}

TEST(Servo, MoreDampingLessOvershoot) {
  SimParams a, b;
  a.b_m = 0.0;
  b.b_m = 0.04;
  const double oa = overshoot(step_response(a, 50.0, 0.3), 0.3);
  const double ob = overshoot(step_response(b, 50.0, 0.3), 0.3);
  EXPECT_GT(oa, 0.0);
  EXPECT_LT(ob, oa);
}

TEST(Servo, TransmissionInertiaSlowsRise) {
  double prev = -1.0;
  for (double jm : {1e-3, 2e-2, 6e-2, 1e-1}) {
    SimParams p;
    p.j_m = jm;
    const double r = half_rise(step_response(p, 10.0, 0.3, 300), 0.3);
    EXPECT_GT(r, prev) << jm;
    prev = r;
  }
}

TEST(Cobra, RestsInPlaceWithZeroReference) {
  Cobra c(CobraConfig{}, SimParams{});
  const Vec3 p0 = c.head().position, t0 = c.tail().position;
  for (int k = 0; k < 1000; ++k) sim::control_tick(c, JointVector::Zero(), {});
  EXPECT_LT((c.head().position - p0).head<2>().norm(), 0.01);
  EXPECT_LT((c.tail().position - t0).head<2>().norm(), 0.01);
}
