#pragma once

#include "cobra/errors.hpp"
#include "cobra/locomanip/driver.hpp"
#include "cobra/locomanip/pursuit.hpp"
#include "cobra/physics/rigid_body.hpp"
#include "cobra/sim/trajectory.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cobra::locomanip {

/// Seeded placement: box at a random bearing from the robot, goal at a random bearing from the box.
struct TaskLayout {
  double box_distance_min = 0.8;
  double box_distance_max = 1.2;
  double goal_distance_min = 1.0;
  double goal_distance_max = 1.5;
};

struct TaskConfig {
  PursuitParams pursuit;
  double box_size = 0.2;     // edge length, m
  double box_mass = 0.3;     // kg
  double box_mu = 0.3;       // box-ground Coulomb coefficient
  double contact_mu = 0.5;   // robot-box coefficient
  double standoff = 0.7;     // distance behind the box face where a push is lined up, m
  double push_width = 0.45;  // lateral box offset that still counts as in front of the robot, m
  double detour = 0.9;       // lateral offset used to walk around the box, m
  TaskLayout layout;
  DriveSettings drive;
};

inline void validate(const TaskConfig& c) {
  validate(c.pursuit);
  if (!(c.box_size > 0.0) || !(c.box_mass > 0.0)) throw ConfigError("box size and mass must be > 0");
  if (c.box_mu < 0.0 || c.contact_mu < 0.0) throw ConfigError("friction coefficients must be >= 0");
  if (c.standoff < 0.0 || c.detour < 0.0 || !(c.push_width > 0.0))
    throw ConfigError("standoff and detour must be >= 0, push width > 0");
  const auto& l = c.layout;
  if (!(l.box_distance_min > 0.0) || l.box_distance_max < l.box_distance_min || !(l.goal_distance_min > 0.0) ||
      l.goal_distance_max < l.goal_distance_min)
    throw ConfigError("layout distances must be > 0 with min <= max");
  validate(c.drive);
}

enum class Outcome { Running, Success, Timeout, Error };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Running: return "running";
    case Outcome::Success: return "success";
    case Outcome::Timeout: return "timeout";
    case Outcome::Error: return "error";
  }
  return "?";
}

struct TaskState {
  Vec2 head = Vec2::Zero();
  Vec2 box = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  int step_count = 0;
  Outcome outcome = Outcome::Running;
  std::string error;
};

/// Which point the planner steered at: 0 lines up behind the box, 1 walks around it, 2 pushes toward the goal.
enum class PlanTarget { Approach = 0, Detour = 1, Push = 2 };

struct TaskLogRow {
  int step = 0;
  Vec2 head = Vec2::Zero();
  Vec2 box = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  PlanTarget target = PlanTarget::Approach;
  Vec2 target_point = Vec2::Zero();
  Vec2 reference = Vec2::Zero();  // robot centroid the plan was made from
  DriveMode mode = DriveMode::Forward;
  double heading_error = 0.0;
  double alpha = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  Outcome outcome = Outcome::Running;
};

struct TaskResult {
  TaskState state;
  sim::Trajectory trajectory;
  std::vector<TaskLogRow> log;
};

struct Placement {
  Vec3 spawn = Vec3::Zero();  // x, y, heading of the robot
  Vec2 box = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
};

inline Placement sample_placement(const TaskLayout& l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> db(l.box_distance_min, l.box_distance_max);
  std::uniform_real_distribution<double> dg(l.goal_distance_min, l.goal_distance_max);
  Placement p;
  p.spawn = Vec3(0.0, 0.0, ang(rng));
  const double a = ang(rng), rb = db(rng);
  p.box = rb * Vec2(std::cos(a), std::sin(a));
  const double b = ang(rng), rg = dg(rng);
  p.goal = p.box + rg * Vec2(std::cos(b), std::sin(b));
  return p;
}

/// Point the robot should steer at given its reference point, the box and the goal.
struct Plan {
  PlanTarget kind = PlanTarget::Approach;
  Vec2 target = Vec2::Zero();
};

/// Behavioral target selection. The robot lines up behind the box on the box-goal ray (walking
/// around it when it starts on the goal side) and then pushes through the box toward the goal.
/// The push phase is kept until the box leaves the space in front of the robot.
class Planner {
 public:
  explicit Planner(const TaskConfig& c) : c_(c) {}

  Plan operator()(const Vec2& ref, const Vec2& box, const Vec2& goal) {
    const Vec2 bg = goal - box;
    const Vec2 u = bg.norm() > 0.0 ? Vec2(bg.normalized()) : Vec2(1.0, 0.0);
    const Vec2 n(-u.y(), u.x());
    const double behind = (box - ref).dot(u);
    const double lateral = (box - ref).dot(n);
    const double back = 0.5 * c_.box_size + c_.standoff;
    const Vec2 lineup = box - back * u;
    if (pushing_ && (behind < 0.0 || std::abs(lateral) > c_.push_width || behind > back + c_.pursuit.head_box))
      pushing_ = false;
    if (!pushing_ && behind > 0.5 * back && (ref - lineup).norm() < c_.pursuit.head_box) pushing_ = true;
    if (pushing_) return {PlanTarget::Push, box + c_.pursuit.lookahead * u};
    if (behind < 0.5 * back) {
      const double side = (ref - box).dot(n) >= 0.0 ? 1.0 : -1.0;
      return {PlanTarget::Detour, box + side * c_.detour * n - back * u};
    }
    return {PlanTarget::Approach, lineup};
  }

  bool pushing() const { return pushing_; }

 private:
  TaskConfig c_;
  bool pushing_ = false;
};

inline double min_link_distance(const robot::Cobra& c, const Vec2& p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < robot::kLinkCount; ++i) d = std::min(d, (c.world().body(i).position.head<2>() - p).norm());
  return d;
}

/// Optional box relocation before a step (replanning scenario); return a position to teleport the box.
using BoxHook = std::function<std::optional<Vec2>(int step, const TaskState&)>;

struct TaskWorld {
  robot::Cobra robot;
  int box_body = -1;

  Vec2 box() const { return robot.world().body(static_cast<std::size_t>(box_body)).position.head<2>(); }

  void place_box(const Vec2& p) {
    auto& b = robot.world().body(static_cast<std::size_t>(box_body));
    b.position.x() = p.x();
    b.position.y() = p.y();
    b.lin_vel.setZero();
    b.ang_vel.setZero();
  }
};

inline TaskWorld make_world(const TaskConfig& c, robot::CobraConfig cfg, const SimParams& params, const Placement& pl) {
  cfg.spawn = pl.spawn;
  TaskWorld w{robot::Cobra(cfg, params), -1};
  auto& world = w.robot.world();
  world.sphere_box_mu = c.contact_mu;
  const Vec3 half = Vec3::Constant(0.5 * c.box_size);
  physics::RigidBodyState b;
  b.mass = c.box_mass;
  b.inertia_body = physics::box_inertia(c.box_mass, half);
  b.position = Vec3(pl.box.x(), pl.box.y(), half.z());
  w.box_body = world.add_body(b);
  contact::GroundParams g = params.ground();
  g.mu_c = g.mu_s = c.box_mu;
  g.mu_v = 0.0;
  world.add_box({w.box_body, half, g, c.box_mu});
  return w;
}

/// Modified pure pursuit with box pushing. Each step re-selects the target, generates waypoints,
/// converts the lookahead direction into a heading error for the gait layer and runs one gait period.
inline TaskResult run_task(const TaskConfig& c, const robot::CobraConfig& cfg, const SimParams& params,
                           std::uint64_t seed, const BoxHook& hook = {}, const sim::EpisodeSettings& es = {},
                           double frequency_hz = 0.5) {
  validate(c);
  sim::validate(es);
  const Placement pl = sample_placement(c.layout, seed);
  TaskResult res;
  res.trajectory.dt = es.control_dt * c.drive.record_every;
  auto& st = res.state;
  st.goal = pl.goal;

  std::optional<TaskWorld> w;
  try {
    w.emplace(make_world(c, cfg, params, pl));
  } catch (const Error& e) {
    st.outcome = Outcome::Error;
    st.error = e.what();
    return res;
  }
  Planner planner(c);
  SidewindingDriver drive(cfg, gait::SineGaitParams::sidewinding(frequency_hz), c.drive);
  res.trajectory.samples.push_back(sim::sample(w->robot, 0.0, w->robot.joint_angles()));

  auto observe = [&] {
    st.head = w->robot.head().position.head<2>();
    st.box = w->box();
  };
  observe();
  double d_prev = (st.box - st.goal).norm();

  while (true) {
    if ((st.box - st.goal).norm() < c.pursuit.box_goal) {
      st.outcome = Outcome::Success;
      break;
    }
    if (st.step_count >= c.pursuit.max_steps) {
      st.outcome = Outcome::Timeout;
      break;
    }
    if (hook) {
      if (auto p = hook(st.step_count, st)) {
        w->place_box(*p);
        observe();
        d_prev = (st.box - st.goal).norm();
      }
    }

    const Vec2 ref = centroid(w->robot);
    const Plan plan = planner(ref, st.box, st.goal);
    double desired = drive.travel_heading(w->robot), alpha = 0.0;
    if ((plan.target - ref).norm() > 1e-9) {
      const auto waypoints = gen_waypoints(ref, plan.target, c.pursuit.waypoints);
      const LookaheadCommand cmd = lookahead_command(ref, waypoints.front(), c.pursuit);
      const Vec2 dir = cmd.point - ref;
      alpha = cmd.alpha;
      desired = std::atan2(dir.y(), dir.x());
    }
    const double heading_error = wrap_angle(desired - drive.travel_heading(w->robot));
    const DriveMode mode = drive.command(w->robot, desired);
    try {
      drive.advance(w->robot, res.trajectory, es);
    } catch (const Error& e) {
      st.outcome = Outcome::Error;
      st.error = e.what();
      break;
    }
    ++st.step_count;
    observe();
    const double d = (st.box - st.goal).norm();
    const GoalRewards r = goal_rewards(d, d_prev);
    d_prev = d;
    res.log.push_back({st.step_count, st.head, st.box, st.goal, plan.kind, plan.target, ref, mode, heading_error, alpha,
                       r.r1, r.r2, Outcome::Running});
  }
  if (!res.log.empty()) res.log.back().outcome = st.outcome;
  return res;
}

struct BatchSummary {
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_steps = 0.0;  // over successful episodes
};

inline BatchSummary summarize(const std::vector<TaskState>& states) {
  BatchSummary s;
  s.episodes = static_cast<int>(states.size());
  double steps = 0.0;
  for (const auto& t : states)
    if (t.outcome == Outcome::Success) {
      ++s.successes;
      steps += t.step_count;
    }
  if (s.episodes > 0) s.success_rate = static_cast<double>(s.successes) / s.episodes;
  if (s.successes > 0) s.mean_steps = steps / s.successes;
  return s;
}

}  // namespace cobra::locomanip
