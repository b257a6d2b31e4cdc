#include "cobra/locomanip/task.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cobra;
using namespace cobra::locomanip;

TEST(Pursuit, ArcPassesThroughGoal) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ang(-kPi / 2 + 0.05, kPi / 2 - 0.05);
  for (int k = 0; k < 1000; ++k) {
    const double l = 0.5;
    const double a = ang(rng);
    const Vec2 g(l * std::sin(a), l * std::cos(a));
    const auto c = pursuit_curvature(g, l);
    if (c.straight) continue;
    EXPECT_LE((oracle::arc_point(c.gamma, std::abs(c.radius) * 2.0 * std::abs(a)) - g).norm(), 1e-9) << a;
  }
}

TEST(Pursuit, StraightAheadHasZeroCurvature) {
  const auto c = pursuit_curvature(Vec2(0.0, 0.5), 0.5);
  EXPECT_TRUE(c.straight);
  EXPECT_EQ(c.gamma, 0.0);
  EXPECT_TRUE(std::isinf(c.radius));
  EXPECT_NEAR(pursuit_curvature(Vec2(0.5, 0.0), 0.5).gamma, 4.0, 1e-12);
  EXPECT_THROW(pursuit_curvature(Vec2(1, 1), 0.0), ConfigError);
}

TEST(Pursuit, OffCircleGoalsAreProjected) {
  EXPECT_NEAR(pursuit_curvature(Vec2(0.6, 0.8), 0.5).gamma, pursuit_curvature(Vec2(0.3, 0.4), 0.5).gamma, 1e-12);
}

TEST(Pursuit, TargetSelection) {
  const Vec2 box(1, 0), goal(2, 0);
  EXPECT_EQ(select_target(Vec2(0.8, 0), box, goal, 0.35), box);
  EXPECT_EQ(select_target(Vec2(0, 0), box, goal, 0.35), goal);
  EXPECT_EQ(select_target_kind(Vec2(0.65, 0), box, 0.35), TargetKind::Goal);
}

TEST(Pursuit, WaypointsAreEvenlySpaced) {
  const auto w = gen_waypoints(Vec2(0, 0), Vec2(5, 10), 4);
  ASSERT_EQ(w.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_LE((w[i] - Vec2(i + 1, 2.0 * (i + 1))).norm(), 1e-12);
  EXPECT_THROW(gen_waypoints(Vec2(0, 0), Vec2(1, 1), 0), ConfigError);
}

TEST(Pursuit, LookaheadCommand) {
  PursuitParams p;
  const auto c = lookahead_command(Vec2(1, 1), Vec2(1, 3), p);
  EXPECT_LE((c.point - Vec2(1, 1.2)).norm(), 1e-12);
  EXPECT_NEAR(c.alpha, std::atan(2 * 0.2 * 0.1 / 2.0), 1e-15);
  EXPECT_THROW(lookahead_command(Vec2(1, 1), Vec2(1, 1), p), ZeroHeading);
}

TEST(Pursuit, GoalRewards) {
  const auto r = goal_rewards(0.4, 0.5);
  EXPECT_DOUBLE_EQ(r.r1, 2.0);
  EXPECT_NEAR(r.r2, 0.1, 1e-15);
  EXPECT_LT(goal_rewards(0.6, 0.5).r2, 0.0);
}

TEST(Pursuit, Validation) {
  PursuitParams p;
  p.lookahead = 0.0;
  EXPECT_THROW(validate(p), ConfigError);
  p = {};
  p.waypoints = 0;
  EXPECT_THROW(validate(p), ConfigError);
  TaskConfig c;
  c.box_mass = -1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.drive.tolerance = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Planner, PhasesFollowTheRobotPosition) {
  TaskConfig c;
  const Vec2 box(0, 0), goal(2, 0);
  const double back = 0.5 * c.box_size + c.standoff;
  Planner far(c);
  const Plan a = far(Vec2(-2.0, 0.3), box, goal);
  EXPECT_EQ(a.kind, PlanTarget::Approach);
  EXPECT_LE((a.target - Vec2(-back, 0)).norm(), 1e-12);

  Planner wrong_side(c);
  const Plan d = wrong_side(Vec2(1.0, 0.2), box, goal);
  EXPECT_EQ(d.kind, PlanTarget::Detour);
  EXPECT_NEAR(d.target.y(), c.detour, 1e-12);
  EXPECT_NEAR(wrong_side(Vec2(1.0, -0.2), box, goal).target.y(), -c.detour, 1e-12);

  Planner lined_up(c);
  const Plan p = lined_up(Vec2(-back + 0.05, 0.0), box, goal);
  EXPECT_EQ(p.kind, PlanTarget::Push);
  EXPECT_TRUE(lined_up.pushing());
  EXPECT_LE((p.target - Vec2(c.pursuit.lookahead, 0)).norm(), 1e-12);
  EXPECT_EQ(lined_up(Vec2(-0.3, 0.1), box, goal).kind, PlanTarget::Push);
  EXPECT_NE(lined_up(Vec2(-0.3, 1.0), box, goal).kind, PlanTarget::Push);
  EXPECT_FALSE(lined_up.pushing());
}

TEST(Placement, DeterministicAndInsideLayout) {
  const TaskLayout l;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto a = sample_placement(l, s), b = sample_placement(l, s);
    EXPECT_EQ(a.box, b.box);
    EXPECT_EQ(a.goal, b.goal);
    EXPECT_EQ(a.spawn, b.spawn);
    EXPECT_GE(a.box.norm(), l.box_distance_min);
    EXPECT_LE(a.box.norm(), l.box_distance_max);
    const double g = (a.goal - a.box).norm();
    EXPECT_GE(g, l.goal_distance_min - 1e-12);
    EXPECT_LE(g, l.goal_distance_max + 1e-12);
  }
  EXPECT_NE(sample_placement(l, 1).box, sample_placement(l, 2).box);
}

TEST(Task, ShortRunTimesOutWithLog) {
  TaskConfig c;
  c.pursuit.max_steps = 2;
  const auto r = run_task(c, robot::CobraConfig{}, SimParams{}, 3);
  EXPECT_EQ(r.state.outcome, Outcome::Timeout);
  EXPECT_EQ(r.state.step_count, 2);
  ASSERT_EQ(r.log.size(), 2u);
  EXPECT_EQ(r.log.back().outcome, Outcome::Timeout);
  EXPECT_EQ(r.trajectory.size(), 1u + 2u * 200u / static_cast<std::size_t>(c.drive.record_every));
  sim::validate(r.trajectory);
}

TEST(Task, GoalAlreadyReachedSucceedsImmediately) {
  TaskConfig c;
  int calls = 0;
  const auto goal = sample_placement(c.layout, 4).goal;
  const auto r = run_task(c, robot::CobraConfig{}, SimParams{}, 4, [&](int, const TaskState&) -> std::optional<Vec2> {
    ++calls;
    return goal;
  });
  EXPECT_EQ(r.state.outcome, Outcome::Success);
  EXPECT_EQ(r.state.step_count, 1);
  EXPECT_EQ(calls, 1);
}

TEST(Task, Summary) {
  std::vector<TaskState> s(4);
  s[0].outcome = s[2].outcome = Outcome::Success;
  s[0].step_count = 10;
  s[2].step_count = 30;
  const auto b = summarize(s);
  EXPECT_EQ(b.successes, 2);
  EXPECT_DOUBLE_EQ(b.success_rate, 0.5);
  EXPECT_DOUBLE_EQ(b.mean_steps, 20.0);
}
