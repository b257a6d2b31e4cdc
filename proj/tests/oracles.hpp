#pragma once

// Independent reference computations used by the tests and the acceptance binary.
// None of these call into the code they check.

#include "cobra/physics/constraints.hpp"
#include "cobra/physics/solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using cobra::MatX;
using cobra::VecX;

/// Implicit (backward Euler in velocity) spring-damper, one DOF:
///   m (v' - v) = h (-kp (x + h v') - kd v'),  x' = x + h v'
struct SpringDamper {
  double m, kp, kd, h;
  void step(double& x, double& v) const {
    v = (m * v - h * kp * x) / (m + h * kd + h * h * kp);
    x += h * v;
  }
};

/// Dense system A lambda = b for the rows, where
///   A = J M^-1 J^T + diag(cfm)/h,  b = (rhs - J v_free)/h.
struct DenseSystem {
  MatX A;
  VecX b;
};

inline DenseSystem dense_system(std::span<const cobra::physics::ConstraintRow> rows,
                                std::span<const cobra::physics::InverseMass> inv,
                                std::span<const cobra::Vec6> v_free, double h) {
  const auto nb = static_cast<Eigen::Index>(inv.size());
  const auto n = static_cast<Eigen::Index>(rows.size());
  MatX J = MatX::Zero(n, 6 * nb), Minv = MatX::Zero(6 * nb, 6 * nb);
  VecX v(6 * nb);
  for (Eigen::Index k = 0; k < nb; ++k) {
    Minv.block<3, 3>(6 * k, 6 * k) = inv[static_cast<std::size_t>(k)].inv_mass * cobra::Mat3::Identity();
    Minv.block<3, 3>(6 * k + 3, 6 * k + 3) = inv[static_cast<std::size_t>(k)].inv_inertia;
    v.segment<6>(6 * k) = v_free[static_cast<std::size_t>(k)];
  }
  VecX cfm(n), rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (r.body_a >= 0) J.block<1, 6>(i, 6 * r.body_a) += r.jac_a.transpose();
    if (r.body_b >= 0) J.block<1, 6>(i, 6 * r.body_b) += r.jac_b.transpose();
    cfm(i) = r.cfm;
    rhs(i) = r.rhs;
  }
  DenseSystem s;
  s.A = J * Minv * J.transpose();
  s.A.diagonal() += cfm / h;
  s.b = (rhs - J * v) / h;
  return s;
}

/// Random well-posed bilateral system: `bodies` free bodies, `n` rows with random Jacobians.
struct RandomSystem {
  std::vector<cobra::physics::ConstraintRow> rows;
  std::vector<cobra::physics::InverseMass> inv;
  std::vector<cobra::Vec6> v_free;
  double h = 1e-3;
};

inline RandomSystem random_system(std::mt19937_64& rng, int bodies, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.5, 2.0), cf(1e-6, 1e-4);
  RandomSystem s;
  for (int k = 0; k < bodies; ++k) {
    cobra::physics::InverseMass im;
    im.inv_mass = 1.0 / pos(rng);
    cobra::Mat3 a;
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = u(rng);
    im.inv_inertia = a * a.transpose() + 0.5 * cobra::Mat3::Identity();
    s.inv.push_back(im);
    cobra::Vec6 v;
    for (int i = 0; i < 6; ++i) v(i) = u(rng);
    s.v_free.push_back(v);
  }
  std::uniform_int_distribution<int> pick(-1, bodies - 1);
  for (int i = 0; i < n; ++i) {
    cobra::physics::ConstraintRow r;
    r.body_a = pick(rng);
    do r.body_b = pick(rng);
    while (r.body_b == r.body_a || (r.body_a < 0 && r.body_b < 0));
    for (int d = 0; d < 6; ++d) {
      r.jac_a(d) = r.body_a < 0 ? 0.0 : u(rng);
      r.jac_b(d) = u(rng);
    }
    r.rhs = u(rng);
    r.cfm = cf(rng);
    s.rows.push_back(r);
  }
  return s;
}

/// Dense argmax scan of f on [a, b].
template <class F>
double argmax_scan(F f, double a, double b, int n) {
  double best_x = a, best = f(a);
  for (int i = 1; i <= n; ++i) {
    const double x = a + (b - a) * i / n;
    const double y = f(x);
    if (y > best) {
      best = y;
      best_x = x;
    }
  }
  return best_x;
}

/// Point on the circular arc through the origin tangent to +y with curvature gamma, after arc length s.
inline cobra::Vec2 arc_point(double gamma, double s) {
  if (gamma == 0.0) return {0.0, s};
  const double r = 1.0 / gamma;
  return {r * (1.0 - std::cos(s * gamma)), r * std::sin(s * gamma)};
}

/// Textbook Pearson correlation.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

}  // namespace oracle
