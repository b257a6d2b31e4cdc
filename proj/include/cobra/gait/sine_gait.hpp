#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/math.hpp"
#include "cobra/robot/cobra.hpp"

#include <cmath>

namespace cobra::gait {

using robot::JointVector;
using robot::kJointCount;

/// Open-loop sine reference q_j(t) = A_j sin(omega t + phase_j).
struct SineGaitParams {
  double a_pitch_deg = 14.0;
  double a_yaw_deg = 60.0;
  double omega = 2.0 * kPi * 0.5;
  JointVector phase = sidewinding_phase();
  /// Which joints receive the pitch amplitude; matches the robot's axis pattern.
  std::vector<robot::JointAxis> axes = robot::CobraConfig::default_axes();

  double frequency() const { return omega / (2.0 * kPi); }
  double period() const { return 2.0 * kPi / omega; }

  static JointVector sidewinding_phase() {
    JointVector p;
    p << 0, 0, 1, 1, 2, 2, 3, 3, 0, 0, 1;
    return p * (kPi / 2.0);
  }

  static SineGaitParams sidewinding(double frequency_hz) {
    SineGaitParams g;
    g.omega = 2.0 * kPi * frequency_hz;
    return g;
  }
};

inline void validate(const SineGaitParams& p) {
  if (p.a_pitch_deg < 0.0 || p.a_yaw_deg < 0.0) throw ConfigError("gait amplitudes must be >= 0");
  if (!(p.omega > 0.0)) throw ConfigError("gait frequency must be > 0");
  if (p.axes.size() != kJointCount) throw ConfigError("gait axis pattern must list 11 joints");
}

inline JointVector sine_amplitudes(const SineGaitParams& p) {
  JointVector a;
  for (std::size_t j = 0; j < kJointCount; ++j)
    a(static_cast<Eigen::Index>(j)) = deg2rad(p.axes[j] == robot::JointAxis::Pitch ? p.a_pitch_deg : p.a_yaw_deg);
  return a;
}

inline JointVector sine_reference(double t, const SineGaitParams& p) {
  const JointVector amp = sine_amplitudes(p);
  JointVector q;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kJointCount); ++j)
    q(j) = amp(j) * std::sin(p.omega * t + p.phase(j));
  return q;
}

}  // namespace cobra::gait
