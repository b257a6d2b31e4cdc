#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/world.hpp"
#include "cobra/robot/actuator.hpp"
#include "cobra/robot/sim_params.hpp"

#include <array>
#include <span>
#include <vector>

namespace cobra::robot {

inline constexpr std::size_t kLinkCount = 12;
inline constexpr std::size_t kJointCount = 11;

using JointVector = Eigen::Matrix<double, static_cast<int>(kJointCount), 1>;

enum class JointAxis { Pitch, Yaw };

/// Geometry and servo configuration of the 12-link, 11-joint snake.
struct CobraConfig {
  std::size_t link_count = kLinkCount;
  std::size_t joint_count = kJointCount;
  std::vector<double> link_length = std::vector<double>(kLinkCount, 0.1);
  std::vector<double> link_radius = std::vector<double>(kLinkCount, 0.04);
  std::vector<double> link_mass = std::vector<double>(kLinkCount, 0.4);
  /// Axis of each joint counted from the head; defaults to pitch, yaw, pitch, ...
  std::vector<JointAxis> joint_axes = default_axes();
  double joint_limit = deg2rad(100.0);
  double joint_erp = 0.2;
  double joint_cfm = 1e-6;
  ServoGains servo;
  double u_max = 10.0;
  /// Head position (x, y) and heading (rad) at construction; the body trails along -heading.
  Vec3 spawn = Vec3::Zero();

  static std::vector<JointAxis> default_axes() {
    std::vector<JointAxis> axes(kJointCount);
    for (std::size_t j = 0; j < kJointCount; ++j) axes[j] = j % 2 == 0 ? JointAxis::Pitch : JointAxis::Yaw;
    return axes;
  }
};

inline void validate(const CobraConfig& c) {
  if (c.link_count != kLinkCount || c.joint_count != kJointCount)
    throw ConfigError("COBRA has 12 links and 11 joints");
  if (c.link_length.size() != kLinkCount || c.link_radius.size() != kLinkCount || c.link_mass.size() != kLinkCount)
    throw ConfigError("per-link geometry must list 12 values");
  for (std::size_t i = 0; i < kLinkCount; ++i) {
    if (!(c.link_length[i] > 0.0) || !(c.link_radius[i] > 0.0) || !(c.link_mass[i] > 0.0))
      throw ConfigError("link length, radius and mass must be > 0");
  }
  if (c.joint_axes.size() != kJointCount) throw ConfigError("joint axis pattern must list 11 joints");
  for (std::size_t j = 0; j + 1 < kJointCount; ++j)
    if (c.joint_axes[j] == c.joint_axes[j + 1]) throw ConfigError("joint axes must alternate between pitch and yaw");
  if (!(c.joint_limit > 0.0) || c.joint_limit >= kPi) throw ConfigError("joint limit must lie in (0, pi)");
  if (c.joint_erp < 0.0 || c.joint_erp > 1.0 || c.joint_cfm < 0.0) throw ConfigError("invalid joint erp/cfm");
  if (!(c.u_max > 0.0)) throw ConfigError("u_max must be > 0");
}

inline Vec3 axis_vector(JointAxis a) { return a == JointAxis::Pitch ? Vec3::UnitY() : Vec3::UnitZ(); }

/// Head pose and joint angles: the underactuated head coordinates and the actuated joint coordinates.
struct PartitionedState {
  Vec3 head_position = Vec3::Zero();
  Quat head_orientation = Quat::Identity();
  JointVector joint_angles = JointVector::Zero();
};

/// A simulated COBRA: the physics world plus the actuator model driving its joints.
///
/// Body 0 is the head; joint j connects body j (toward the head) to body j+1.
/// The head has no actuator of its own.
class Cobra {
 public:
  Cobra(const CobraConfig& cfg, const SimParams& params) : cfg_(cfg), params_(params) {
    validate(cfg_);
    actuator_ = params_.actuator(cfg_.u_max);
    validate(actuator_);
    contact::validate(params_.ground());
    world_.ground = params_.ground();
    world_.solver.kind = physics::SolverKind::SchurProjectedGaussSeidel;

    const double yaw = cfg_.spawn.z();
    const Quat heading(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
    const Vec3 back = heading * Vec3(-1.0, 0.0, 0.0);
    Vec3 center(cfg_.spawn.x(), cfg_.spawn.y(), 0.0);
    for (std::size_t i = 0; i < kLinkCount; ++i) {
      if (i > 0) center += back * 0.5 * (cfg_.link_length[i - 1] + cfg_.link_length[i]);
      physics::RigidBodyState b;
      b.mass = cfg_.link_mass[i];
      const double sink = b.mass * 9.81 / std::max(params_.k1, 1.0);
      b.position = Vec3(center.x(), center.y(), cfg_.link_radius[i] - std::min(sink, 0.5 * cfg_.link_radius[i]));
      b.orientation = heading;
      b.inertia_body = physics::cylinder_inertia_x(b.mass, cfg_.link_radius[i], cfg_.link_length[i]);
      if (i > 0) {
        // Reflected transmission inertia about the driving joint's axis.
        const Vec3 ax = axis_vector(cfg_.joint_axes[i - 1]);
        b.inertia_body += actuator_.j_m * ax * ax.transpose();
      }
      world_.add_body(b);
      world_.add_sphere({static_cast<int>(i), Vec3::Zero(), cfg_.link_radius[i]});
    }
    for (std::size_t j = 0; j < kJointCount; ++j) {
      physics::HingeJoint h;
      h.body_a = static_cast<int>(j);
      h.body_b = static_cast<int>(j + 1);
      h.anchor_a = Vec3(-0.5 * cfg_.link_length[j], 0.0, 0.0);
      h.anchor_b = Vec3(0.5 * cfg_.link_length[j + 1], 0.0, 0.0);
      h.axis_a = h.axis_b = axis_vector(cfg_.joint_axes[j]);
      h.erp = cfg_.joint_erp;
      h.cfm = cfg_.joint_cfm;
      h.limits = physics::JointLimits{-cfg_.joint_limit, cfg_.joint_limit};
      world_.add_hinge(h);
    }
  }

  physics::World& world() { return world_; }
  const physics::World& world() const { return world_; }
  const CobraConfig& config() const { return cfg_; }
  const SimParams& params() const { return params_; }
  const ActuatorParams& actuator() const { return actuator_; }

  JointVector joint_angles() const {
    JointVector q;
    for (std::size_t j = 0; j < kJointCount; ++j) q(static_cast<Eigen::Index>(j)) = world_.joint_angle(j);
    return q;
  }

  JointVector joint_rates() const {
    JointVector q;
    for (std::size_t j = 0; j < kJointCount; ++j) q(static_cast<Eigen::Index>(j)) = world_.joint_rate(j);
    return q;
  }

  /// Sets each joint's actuator torque from the servo law for the given references.
  void apply_commands(const JointVector& q_ref) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const auto k = static_cast<Eigen::Index>(j);
      const double q = world_.joint_angle(j);
      const double qd = world_.joint_rate(j);
      world_.set_joint_torque(j, actuator_torque(q, qd, {q_ref(k)}, actuator_, cfg_.servo));
    }
  }

  PartitionedState partition_state() const {
    PartitionedState s;
    s.head_position = world_.body(0).position;
    s.head_orientation = world_.body(0).orientation;
    s.joint_angles = joint_angles();
    return s;
  }

  const physics::RigidBodyState& head() const { return world_.body(0); }
  const physics::RigidBodyState& mid() const { return world_.body(kLinkCount / 2 - 1); }
  const physics::RigidBodyState& tail() const { return world_.body(kLinkCount - 1); }

  /// Unit vector in the ground plane pointing out of the head (from link 2 toward the head).
  Vec2 forward() const {
    const Vec3 d = world_.body(0).position - world_.body(1).position;
    Vec2 f(d.x(), d.y());
    const double n = f.norm();
    return n > 0.0 ? Vec2(f / n) : Vec2::UnitX();
  }

  /// Poses every link for the given joint angles with the head held at its
  /// current pose; velocities are zeroed.
  void impose_joint_angles(const JointVector& q) {
    auto& w = world_;
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const auto& h = w.joints()[j];
      const auto& a = w.body(static_cast<std::size_t>(h.body_a));
      auto& b = w.body(static_cast<std::size_t>(h.body_b));
      const Quat rel(Eigen::AngleAxisd(q(static_cast<Eigen::Index>(j)), h.axis_a));
      b.orientation = (a.orientation * h.rest_relative * rel).normalized();
      const Vec3 anchor = a.to_world(h.anchor_a);
      b.position = anchor - b.orientation * h.anchor_b;
    }
    for (std::size_t i = 0; i < kLinkCount; ++i) {
      w.body(i).lin_vel.setZero();
      w.body(i).ang_vel.setZero();
    }
  }

  double total_mass() const { return world_.total_mass(); }

 private:
  CobraConfig cfg_;
  SimParams params_;
  ActuatorParams actuator_;
  physics::World world_;
};

inline Cobra build_cobra(const CobraConfig& cfg, const SimParams& params) { return Cobra(cfg, params); }

}  // namespace cobra::robot
