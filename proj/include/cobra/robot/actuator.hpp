#pragma once

#include "cobra/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cobra::robot {

/// DC-motor joint actuator, shared by every joint of the robot.
struct ActuatorParams {
  double j_m = 2e-3;   // transmission (reflected rotor) inertia, kg m^2
  double b_m = 0.02;   // internal damping, N m s/rad
  double k_t = 1.0;    // aggregated motor constant scaling the servo command
  double u_max = 10.0;  // command saturation, N m
};

inline void validate(const ActuatorParams& p) {
  if (!(p.j_m > 0.0)) throw ConfigError("actuator j_m must be > 0");
  if (p.b_m < 0.0) throw ConfigError("actuator b_m must be >= 0");
  if (!(p.k_t > 0.0)) throw ConfigError("actuator k_t must be > 0");
  if (!(p.u_max > 0.0)) throw ConfigError("actuator u_max must be > 0");
}

/// PD position-servo gains (per unit motor constant).
struct ServoGains {
  double kp = 10.0;  // N m / rad
  double kd = 0.3;   // N m s / rad
};

struct JointCommand {
  double q_ref = 0.0;
};

/// u = clamp(k_t (kp (q_ref - q) - kd q_dot), +-u_max) - b_m q_dot
inline double actuator_torque(double q, double q_dot, JointCommand cmd, const ActuatorParams& p,
                              const ServoGains& g) {
  const double servo = p.k_t * (g.kp * (cmd.q_ref - q) - g.kd * q_dot);
  return std::clamp(servo, -p.u_max, p.u_max) - p.b_m * q_dot;
}

}  // namespace cobra::robot
