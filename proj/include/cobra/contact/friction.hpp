#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/math.hpp"

#include <cmath>

namespace cobra::contact {

/// Compliant ground with Stribeck friction.
struct GroundParams {
  double k1 = 3000.0;   // normal spring (N/m)
  double k2 = 30.0;     // normal damping (N s/m)
  double mu_c = 0.3;    // Coulomb coefficient
  double mu_s = 0.45;   // static coefficient
  double mu_v = 0.05;   // viscous coefficient (N s/m)
  double v_s = 0.02;    // Stribeck velocity (m/s)
};

inline void validate(const GroundParams& g) {
  if (g.k1 < 0.0 || g.k2 < 0.0) throw ConfigError("ground k1, k2 must be >= 0");
  if (g.mu_c < 0.0 || g.mu_s < 0.0 || g.mu_v < 0.0) throw ConfigError("friction coefficients must be >= 0");
  if (!(g.v_s > 0.0)) throw ConfigError("Stribeck velocity must be > 0");
}

/// Velocity scale of the tanh used in place of sgn() for tangential ground friction.
inline constexpr double kSignSmoothingVelocity = 1e-4;

inline double smooth_sign(double v) { return std::tanh(v / kSignSmoothingVelocity); }

/// s(v) = mu_c - (mu_c - mu_s) exp(-v^2 / v_s^2)
inline double stribeck_coefficient(double v, const GroundParams& g) {
  return g.mu_c - (g.mu_c - g.mu_s) * std::exp(-(v * v) / (g.v_s * g.v_s));
}

/// Normal force of the compliant ground for penetration p_z (negative inside) and
/// its rate; zero when separated, never adhesive.
inline double normal_force(double p_z, double p_z_dot, const GroundParams& g) {
  if (p_z > 0.0) return 0.0;
  return std::max(0.0, -g.k1 * p_z - g.k2 * p_z_dot);
}

/// Smooth stick-slip friction curve (breakaway + Coulomb + viscous).
struct StickSlipParams {
  double f_brk = 1.0;  // breakaway force (N)
  double f_c = 0.8;    // Coulomb force (N)
  double f_v = 0.0;    // viscous coefficient (N s/m)
  double v_brk = 0.1;  // breakaway velocity (m/s)

  double v_stribeck() const { return v_brk / std::sqrt(2.0); }
  double v_coulomb() const { return v_brk / 10.0; }
};

inline void validate(const StickSlipParams& p) {
  if (!(p.f_brk >= p.f_c) || p.f_c < 0.0) throw ConfigError("stick-slip requires F_brk >= F_C >= 0");
  if (!(p.v_brk > 0.0)) throw ConfigError("breakaway velocity must be > 0");
}

inline double stick_slip_force(double v, const StickSlipParams& p) {
  const double u = v / p.v_stribeck();
  const double stribeck = std::sqrt(2.0 * std::exp(1.0)) * (p.f_brk - p.f_c) * std::exp(-u * u) * u;
  return stribeck + p.f_c * std::tanh(v / p.v_coulomb()) + p.f_v * v;
}

}  // namespace cobra::contact
