#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/math.hpp"

#include <algorithm>
#include <cmath>

namespace cobra::gait {

/// Modified Kuramoto oscillator network with second-order amplitude dynamics.
struct KuramotoParams {
  std::size_t n = 0;
  double a = 4.0;
  VecX mu;     // coupling gain per channel
  VecX R;      // desired amplitude
  VecX omega;  // intrinsic frequency, rad/s
  VecX theta;  // n-1 phase shifts
  VecX delta;  // output offsets

  static KuramotoParams uniform(std::size_t n, double a, double mu, double amplitude, double omega, double theta) {
    KuramotoParams p;
    p.n = n;
    p.a = a;
    p.mu = VecX::Constant(static_cast<Eigen::Index>(n), mu);
    p.R = VecX::Constant(static_cast<Eigen::Index>(n), amplitude);
    p.omega = VecX::Constant(static_cast<Eigen::Index>(n), omega);
    p.theta = VecX::Constant(static_cast<Eigen::Index>(n > 0 ? n - 1 : 0), theta);
    p.delta = VecX::Zero(static_cast<Eigen::Index>(n));
    return p;
  }
};

inline void validate(const KuramotoParams& p) {
  const auto n = static_cast<Eigen::Index>(p.n);
  if (p.n == 0) throw ConfigError("kuramoto network needs at least one channel");
  if (p.mu.size() != n || p.R.size() != n || p.omega.size() != n || p.delta.size() != n || p.theta.size() != n - 1)
    throw ConfigError("kuramoto parameter vectors have inconsistent lengths");
  if (!(p.a > 0.0)) throw ConfigError("kuramoto convergence rate must be > 0");
  if ((p.mu.array() < 0.0).any()) throw ConfigError("kuramoto coupling gains must be >= 0");
  if ((p.R.array() < 0.0).any()) throw ConfigError("kuramoto amplitudes must be >= 0");
}

struct KuramotoState {
  VecX phi;
  VecX r;
  VecX r_dot;

  static KuramotoState rest(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return {VecX::Zero(k), VecX::Zero(k), VecX::Zero(k)};
  }
};

/// Tridiagonal diffusive coupling: rows (-mu1, mu1), (mu_i, -2 mu_i, mu_i), (mu_n, -mu_n).
inline MatX coupling_matrix(const KuramotoParams& p) {
  const auto n = static_cast<Eigen::Index>(p.n);
  MatX A = MatX::Zero(n, n);
  if (n == 1) return A;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = p.mu(i);
    if (i == 0) {
      A(0, 0) = -m;
      A(0, 1) = m;
    } else if (i == n - 1) {
      A(i, i - 1) = m;
      A(i, i) = -m;
    } else {
      A(i, i - 1) = m;
      A(i, i) = -2.0 * m;
      A(i, i + 1) = m;
    }
  }
  return A;
}

/// n x (n-1) bidiagonal matrix applied to the phase shifts.
inline MatX shift_matrix(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  MatX B = MatX::Zero(k, std::max<Eigen::Index>(k - 1, 0));
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    B(i, i) = 1.0;
    B(i + 1, i) = -1.0;
  }
  return B;
}

struct KuramotoDerivative {
  VecX phi_dot;
  VecX r_dot;
  VecX r_ddot;
};

inline KuramotoDerivative kuramoto_rhs(const KuramotoState& s, const KuramotoParams& p, const MatX& A, const VecX& b_theta) {
  KuramotoDerivative d;
  d.phi_dot = p.omega + A * s.phi + b_theta;
  d.r_dot = s.r_dot;
  d.r_ddot = p.a * (p.a / 4.0 * (p.R - s.r) - s.r_dot);
  return d;
}

inline VecX kuramoto_output(const KuramotoState& s, const KuramotoParams& p) {
  return (s.r.array() * s.phi.array().sin()).matrix() + p.delta;
}

/// One RK4 step; returns the output x evaluated at the new state.
inline VecX kuramoto_step(KuramotoState& s, const KuramotoParams& p, double h) {
  if (!(h > 0.0)) throw ConfigError("kuramoto step size must be > 0");
  const MatX A = coupling_matrix(p);
  const VecX bt = shift_matrix(p.n) * p.theta;
  auto advance = [](const KuramotoState& x, const KuramotoDerivative& d, double dt) {
    return KuramotoState{x.phi + dt * d.phi_dot, x.r + dt * d.r_dot, x.r_dot + dt * d.r_ddot};
  };
  const auto k1 = kuramoto_rhs(s, p, A, bt);
  const auto k2 = kuramoto_rhs(advance(s, k1, h / 2.0), p, A, bt);
  const auto k3 = kuramoto_rhs(advance(s, k2, h / 2.0), p, A, bt);
  const auto k4 = kuramoto_rhs(advance(s, k3, h), p, A, bt);
  s.phi += h / 6.0 * (k1.phi_dot + 2.0 * k2.phi_dot + 2.0 * k3.phi_dot + k4.phi_dot);
  s.r += h / 6.0 * (k1.r_dot + 2.0 * k2.r_dot + 2.0 * k3.r_dot + k4.r_dot);
  s.r_dot += h / 6.0 * (k1.r_ddot + 2.0 * k2.r_ddot + 2.0 * k3.r_ddot + k4.r_ddot);
  return kuramoto_output(s, p);
}

/// Channels whose offsets steer() biases.
struct SteerSettings {
  std::vector<std::size_t> channels;
  double gain = 0.5;         // rad of offset per rad of heading error
  double max_offset = 0.35;  // rad
};

inline KuramotoParams steer(const KuramotoParams& params, double heading_error, const SteerSettings& s) {
  if (!(std::abs(heading_error) <= kPi)) throw ConfigError("heading error must lie in [-pi, pi]");
  KuramotoParams out = params;
  if (heading_error == 0.0) return out;
  const double bias = std::clamp(s.gain * heading_error, -s.max_offset, s.max_offset);
  for (auto c : s.channels) {
    if (c >= params.n) throw ConfigError("steer channel out of range");
    out.delta(static_cast<Eigen::Index>(c)) += bias;
  }
  return out;
}

}  // namespace cobra::gait
