#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/math.hpp"

#include <Eigen/Eigenvalues>

namespace cobra::physics {

/// State and mass properties of one link in maximal coordinates.
struct RigidBodyState {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec3 lin_vel = Vec3::Zero();
  Vec3 ang_vel = Vec3::Zero();
  double mass = 1.0;
  Mat3 inertia_body = Mat3::Identity();

  Mat3 rotation() const { return orientation.toRotationMatrix(); }

  Vec3 to_world(const Vec3& local) const { return position + orientation * local; }

  /// Velocity of a world-space point rigidly attached to the body.
  Vec3 point_velocity(const Vec3& world_point) const {
    return lin_vel + ang_vel.cross(world_point - position);
  }

  Mat3 inv_inertia_world() const {
    const Mat3 r = rotation();
    return r * inertia_body.inverse() * r.transpose();
  }
};

/// Throws ConfigError unless mass > 0 and the inertia tensor is symmetric positive-definite.
inline void validate(const RigidBodyState& b) {
  if (!(b.mass > 0.0) || !std::isfinite(b.mass)) throw ConfigError("body mass must be > 0");
  if (!b.inertia_body.isApprox(b.inertia_body.transpose(), 1e-12))
    throw ConfigError("body inertia must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(b.inertia_body, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw ConfigError("body inertia must be positive-definite");
}

/// Solid cylinder with its symmetry axis along the body x axis.
inline Mat3 cylinder_inertia_x(double mass, double radius, double length) {
  const double axial = 0.5 * mass * radius * radius;
  const double transverse = mass * (3.0 * radius * radius + length * length) / 12.0;
  return Eigen::Vector3d(axial, transverse, transverse).asDiagonal();
}

inline Mat3 box_inertia(double mass, const Vec3& half_extents) {
  const Vec3 e = 2.0 * half_extents;
  return Eigen::Vector3d(mass * (e.y() * e.y() + e.z() * e.z()) / 12.0,
                         mass * (e.x() * e.x() + e.z() * e.z()) / 12.0,
                         mass * (e.x() * e.x() + e.y() * e.y()) / 12.0)
      .asDiagonal();
}

inline Mat3 sphere_inertia(double mass, double radius) {
  return Mat3::Identity() * (0.4 * mass * radius * radius);
}

}  // namespace cobra::physics
