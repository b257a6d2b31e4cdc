#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace cobra {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

/// Skew-symmetric cross-product matrix: skew(a) * b == a.cross(b).
inline Mat3 skew(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

/// Two unit vectors orthogonal to `n` and to each other.
inline void orthonormal_basis(const Vec3& n, Vec3& p, Vec3& q) {
  if (std::abs(n.z()) > 0.7071067811865476) {
    const double a = n.y() * n.y() + n.z() * n.z();
    const double k = 1.0 / std::sqrt(a);
    p = Vec3(0.0, -n.z() * k, n.y() * k);
    q = Vec3(a * k, -n.x() * p.z(), n.x() * p.y());
  } else {
    const double a = n.x() * n.x() + n.y() * n.y();
    const double k = 1.0 / std::sqrt(a);
    p = Vec3(-n.y() * k, n.x() * k, 0.0);
    q = Vec3(-n.z() * p.y(), n.z() * p.x(), a * k);
  }
}

/// Rotation angle of `q` about unit `axis` (swing-twist decomposition), in (-pi, pi].
inline double twist_angle(const Quat& q, const Vec3& axis) {
  const double s = q.vec().dot(axis);
  return wrap_angle(2.0 * std::atan2(s, q.w()));
}

inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace cobra
