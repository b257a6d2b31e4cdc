#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/math.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace cobra::locomanip {

struct PursuitParams {
  double lookahead = 0.5;       // l, m
  double step_length = 0.2;     // L, m
  int waypoints = 4;            // n
  double width = 0.1;           // W, m
  double head_box = 0.35;       // delta_hb, m
  double box_goal = 0.25;       // delta_bg, m
  int max_steps = 700;
};

inline void validate(const PursuitParams& p) {
  if (!(p.lookahead > 0.0)) throw ConfigError("lookahead must be > 0");
  if (p.waypoints < 1) throw ConfigError("waypoint count must be >= 1");
  if (!(p.head_box > 0.0) || !(p.box_goal > 0.0)) throw ConfigError("thresholds must be > 0");
  if (!(p.step_length >= 0.0) || !(p.width >= 0.0)) throw ConfigError("step length and width must be >= 0");
  if (p.max_steps < 0) throw ConfigError("max_steps must be >= 0");
}

struct Curvature {
  double gamma = 0.0;
  double radius = std::numeric_limits<double>::infinity();
  bool straight = true;
};

/// Curvature of the arc from the vehicle origin, tangent to its heading (+y), to a goal point on the
/// lookahead circle. x is the lateral offset; points off the circle are projected onto it radially.
inline Curvature pursuit_curvature(const Vec2& goal_in_vehicle, double l) {
  if (!(l > 0.0)) throw ConfigError("lookahead must be > 0");
  Vec2 g = goal_in_vehicle;
  const double n = g.norm();
  if (n > 0.0 && std::abs(n - l) > 1e-12 * l) g *= l / n;
  Curvature c;
  c.gamma = 2.0 * g.x() / (l * l);
  c.straight = c.gamma == 0.0;
  c.radius = c.straight ? std::numeric_limits<double>::infinity() : 1.0 / c.gamma;
  return c;
}

enum class TargetKind { Box, Goal };

/// Literal selection rule: the box when the head is strictly within delta_hb of it, else the goal.
inline TargetKind select_target_kind(const Vec2& head, const Vec2& box, double head_box) {
  return (head - box).norm() < head_box ? TargetKind::Box : TargetKind::Goal;
}

inline Vec2 select_target(const Vec2& head, const Vec2& box, const Vec2& goal, double head_box) {
  return select_target_kind(head, box, head_box) == TargetKind::Box ? box : goal;
}

inline std::vector<Vec2> gen_waypoints(const Vec2& head, const Vec2& target, int n) {
  if (n < 1) throw ConfigError("waypoint count must be >= 1");
  std::vector<Vec2> w;
  w.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) w.push_back(head + (static_cast<double>(i) / (n + 1)) * (target - head));
  return w;
}

struct LookaheadCommand {
  Vec2 point = Vec2::Zero();
  double alpha = 0.0;
};

/// Advances the head by L along H = target - head and computes alpha = atan(2 L W / |H|).
inline LookaheadCommand lookahead_command(const Vec2& head, const Vec2& target, const PursuitParams& p) {
  const Vec2 H = target - head;
  const double d = H.norm();
  if (!(d > 0.0)) throw ZeroHeading("head coincides with the target");
  return {head + p.step_length * H / d, std::atan(2.0 * p.step_length * p.width / d)};
}

struct GoalRewards {
  double r1 = 0.0;
  double r2 = 0.0;
};

inline GoalRewards goal_rewards(double d_t, double d_prev) { return {1.0 / (0.1 + d_t), d_prev - d_t}; }

}  // namespace cobra::locomanip
