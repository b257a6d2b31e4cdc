#pragma once

#include "cobra/errors.hpp"
#include "cobra/gait/kuramoto.hpp"
#include "cobra/sim/episode.hpp"

#include <algorithm>
#include <cmath>

namespace cobra::locomanip {

struct DriveSettings {
  /// Head-to-tail yaw amplitude gradient per rad of heading error while travelling.
  double gain = 1.0;
  double max_gradient = 0.5;
  /// Yaw offset that turns the body in place.
  double turn_offset = 0.8;  // rad
  /// Heading errors beyond this are handled by turning in place.
  double tolerance = 0.5;  // rad
  /// Travel direction of the sidewinding gait relative to the tail-to-head axis, for the
  /// normal and the reversed wave.
  double travel_offset = deg2rad(-80.0);
  double reverse_travel_offset = deg2rad(88.0);
  /// A turn that rotates the body by less than this per step counts as stalled.
  double stall_angle = deg2rad(10.0);
  int stall_steps = 2;
  int record_every = 10;  // control ticks between trajectory samples
};

inline void validate(const DriveSettings& s) {
  if (!(s.gain >= 0.0) || !(s.max_gradient >= 0.0) || s.max_gradient >= 1.0)
    throw ConfigError("steer gain must be >= 0 and max gradient in [0, 1)");
  if (!(s.turn_offset > 0.0)) throw ConfigError("turn offset must be > 0");
  if (!(s.tolerance > 0.0) || s.tolerance > kPi) throw ConfigError("steer tolerance must lie in (0, pi]");
  if (!(s.stall_angle >= 0.0) || s.stall_steps < 1) throw ConfigError("stall settings out of range");
  if (s.record_every < 1) throw ConfigError("record_every must be >= 1");
}

enum class DriveMode { Forward, Backward, TurnLeft, TurnRight };

inline const char* to_string(DriveMode m) {
  switch (m) {
    case DriveMode::Forward: return "forward";
    case DriveMode::Backward: return "backward";
    case DriveMode::TurnLeft: return "left";
    case DriveMode::TurnRight: return "right";
  }
  return "?";
}

inline Vec2 centroid(const robot::Cobra& c) {
  Vec2 m = Vec2::Zero();
  for (std::size_t i = 0; i < robot::kLinkCount; ++i) m += c.world().body(i).position.head<2>();
  return m / static_cast<double>(robot::kLinkCount);
}

/// Planar angle of the tail-to-head axis.
inline double body_axis(const robot::Cobra& c) {
  const Vec3 a = c.head().position - c.tail().position;
  return std::atan2(a.y(), a.x());
}

/// Turns heading commands into CPG parameter changes for the sidewinding gait.
///
/// The gait travels roughly broadside. A positive yaw offset rotates the body
/// counter-clockwise in place; the reversed wave (negated phase lags) with the same
/// offset rotates it clockwise. While travelling, heading is trimmed by scaling yaw
/// amplitudes linearly from head to tail. A turn that stalls for `stall_steps` steps
/// swaps to the other direction.
class SidewindingDriver {
 public:
  SidewindingDriver(const robot::CobraConfig& cfg, const gait::SineGaitParams& g, DriveSettings s)
      : s_(s), cpg_(sim::sidewinding_cpg(g).first, sim::sidewinding_cpg(g).second) {
    validate(s_);
    base_ = cpg_.params();
    reversed_ = base_;
    reversed_.theta = -base_.theta;
    for (std::size_t j = 0; j < robot::kJointCount; ++j)
      if (cfg.joint_axes[j] == robot::JointAxis::Yaw) steer_.channels.push_back(j);
    steer_.gain = 1.0;
    steer_.max_offset = s_.turn_offset;
    period_ = 2.0 * kPi / g.omega;
  }

  double travel_heading(const robot::Cobra& c) const { return wrap_angle(body_axis(c) + s_.travel_offset); }
  double reverse_travel_heading(const robot::Cobra& c) const {
    return wrap_angle(body_axis(c) + s_.reverse_travel_offset);
  }

  /// Chooses the gait for the next step from the desired planar travel direction.
  DriveMode command(const robot::Cobra& c, double desired) {
    const double axis = body_axis(c);
    const bool turning = is_turn(last_);
    if (turning && last_ == prev_ && has_axis_ && std::abs(wrap_angle(axis - prev_axis_)) < s_.stall_angle)
      ++stall_;
    else
      stall_ = 0;
    if (stall_ >= s_.stall_steps) {
      swapped_ = !swapped_;
      stall_ = 0;
    }
    prev_ = last_;
    prev_axis_ = axis;
    has_axis_ = true;

    const double ef = wrap_angle(desired - travel_heading(c));
    const double er = wrap_angle(desired - reverse_travel_heading(c));
    DriveMode m;
    if (std::abs(ef) <= s_.tolerance) m = DriveMode::Forward;
    else if (std::abs(er) <= s_.tolerance) m = DriveMode::Backward;
    else if (turning) m = last_;  // finish the turn already started
    else m = (std::abs(ef) <= std::abs(er) ? ef : er) > 0.0 ? DriveMode::TurnLeft : DriveMode::TurnRight;
    last_ = m;
    if (swapped_ && is_turn(m)) m = m == DriveMode::TurnLeft ? DriveMode::TurnRight : DriveMode::TurnLeft;

    switch (m) {
      // a head-heavy gradient turns the normal wave clockwise and the reversed wave counter-clockwise
      case DriveMode::Forward: cpg_.set_params(graded(base_, -ef)); break;
      case DriveMode::Backward: cpg_.set_params(graded(reversed_, er)); break;
      case DriveMode::TurnLeft: cpg_.set_params(gait::steer(base_, kPi, steer_)); break;
      case DriveMode::TurnRight: cpg_.set_params(gait::steer(reversed_, kPi, steer_)); break;
    }
    return m;
  }

  /// Runs one gait period, appending a sample every `record_every` ticks.
  void advance(robot::Cobra& c, sim::Trajectory& tr, const sim::EpisodeSettings& es) {
    const auto ticks = static_cast<long>(std::llround(period_ / es.control_dt));
    for (long k = 0; k < ticks; ++k) {
      ++tick_;
      const double t = static_cast<double>(tick_) * es.control_dt;
      const robot::JointVector q_ref = cpg_(t);
      try {
        sim::control_tick(c, q_ref, es);
      } catch (const Error& e) {
        throw EpisodeError(t, e.what());
      }
      if (tick_ % s_.record_every == 0) tr.samples.push_back(sim::sample(c, t, q_ref));
    }
  }

  double time(const sim::EpisodeSettings& es) const { return static_cast<double>(tick_) * es.control_dt; }
  double period() const { return period_; }
  const DriveSettings& settings() const { return s_; }

 private:
  gait::KuramotoParams graded(const gait::KuramotoParams& p, double error) const {
    const double g = std::clamp(s_.gain * error, -s_.max_gradient, s_.max_gradient);
    gait::KuramotoParams out = p;
    const double last = static_cast<double>(robot::kJointCount - 1);
    for (auto j : steer_.channels) out.R(static_cast<Eigen::Index>(j)) *= 1.0 + g * (1.0 - 2.0 * static_cast<double>(j) / last);
    return out;
  }

  static bool is_turn(DriveMode m) { return m == DriveMode::TurnLeft || m == DriveMode::TurnRight; }

  DriveSettings s_;
  sim::KuramotoGait cpg_;
  gait::KuramotoParams base_, reversed_;
  gait::SteerSettings steer_;
  double period_ = 2.0;
  long tick_ = 0;
  DriveMode last_ = DriveMode::Forward, prev_ = DriveMode::Forward;
  double prev_axis_ = 0.0;
  bool has_axis_ = false;
  bool swapped_ = false;
  int stall_ = 0;
};

}  // namespace cobra::locomanip
