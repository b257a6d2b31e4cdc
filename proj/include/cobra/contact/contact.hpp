#pragma once

#include "cobra/contact/friction.hpp"
#include "cobra/physics/constraints.hpp"
#include "cobra/physics/math.hpp"
#include "cobra/physics/rigid_body.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace cobra::contact {

using physics::ConstraintRow;
using physics::kInf;
using physics::kStatic;
using physics::RigidBodyState;

/// One point of contact on `body` against `other` (kStatic for the ground plane).
/// `normal` points from `other` into `body`; `penetration` is <= 0 when touching.
struct ContactPoint {
  int body = kStatic;
  int other = kStatic;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double penetration = 0.0;
  Vec3 rel_vel = Vec3::Zero();
};

/// Ground reaction force of the compliant Stribeck ground model at a contact point.
inline Vec3 ground_force(const ContactPoint& cp, const GroundParams& g) {
  const double pz = cp.penetration;
  if (pz > 0.0) return Vec3::Zero();
  const double fz = normal_force(pz, cp.rel_vel.z(), g);
  Vec3 f(0.0, 0.0, fz);
  for (int i = 0; i < 2; ++i) {
    const double v = cp.rel_vel(i);
    const double s = stribeck_coefficient(std::abs(v), g);
    f(i) = -s * fz * smooth_sign(v) - g.mu_v * v;
  }
  return f;
}

enum class PyramidMode {
  /// Tangential force limited by a constant, independent of the normal force.
  ConstantLimit,
  /// Normals solved frictionless first, then tangential limits mu * |F_N|.
  NormalScaled,
};

struct ContactRowParams {
  double erp = 0.2;
  double cfm = 1e-6;
  double h = 1e-3;
};

inline Vec3 lever(const std::span<const RigidBodyState> bodies, int body, const Vec3& point) {
  return body == kStatic ? Vec3::Zero() : Vec3(point - bodies[static_cast<std::size_t>(body)].position);
}

/// Row constraining the velocity of `body` relative to `other` at cp.point along `dir`.
inline ConstraintRow directional_row(const ContactPoint& cp, std::span<const RigidBodyState> bodies, const Vec3& dir) {
  ConstraintRow r;
  r.body_a = cp.other;
  r.body_b = cp.body;
  const Vec3 ra = lever(bodies, cp.other, cp.point);
  const Vec3 rb = lever(bodies, cp.body, cp.point);
  r.jac_a.head<3>() = -dir;
  r.jac_a.tail<3>() = -ra.cross(dir);
  r.jac_b.head<3>() = dir;
  r.jac_b.tail<3>() = rb.cross(dir);
  return r;
}

inline void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2) {
  if (std::abs(n.z()) > 1.0 - 1e-12) {
    t1 = Vec3::UnitX();
    t2 = n.z() > 0.0 ? Vec3::UnitY() : Vec3(-Vec3::UnitY());
    return;
  }
  orthonormal_basis(n, t1, t2);
}

/// One unilateral normal row followed by two tangential friction rows.
///
/// ConstantLimit bounds the tangential rows by +-mu (a force). NormalScaled
/// leaves them at zero; the caller sets them from the frictionless normal
/// solution via set_pyramid_bounds.
inline std::vector<ConstraintRow> contact_rows(const ContactPoint& cp, double mu, PyramidMode mode,
                                               std::span<const RigidBodyState> bodies,
                                               const ContactRowParams& p = {}) {
  std::vector<ConstraintRow> rows;
  rows.reserve(3);
  ConstraintRow n = directional_row(cp, bodies, cp.normal);
  n.rhs = (p.erp / p.h) * std::max(0.0, -cp.penetration);
  n.cfm = p.cfm;
  n.lambda_lo = 0.0;
  n.lambda_hi = kInf;
  rows.push_back(n);

  Vec3 t1, t2;
  tangent_basis(cp.normal, t1, t2);
  for (const Vec3& t : {t1, t2}) {
    ConstraintRow r = directional_row(cp, bodies, t);
    r.cfm = p.cfm;
    const double limit = mode == PyramidMode::ConstantLimit ? mu : 0.0;
    r.lambda_lo = -limit;
    r.lambda_hi = limit;
    rows.push_back(r);
  }
  return rows;
}

/// Sets both tangential bounds of a contact triple to mu * |F_N|.
inline void set_pyramid_bounds(std::span<ConstraintRow> tangential_rows, double normal_force, double mu) {
  const double limit = mu * std::abs(normal_force);
  for (auto& r : tangential_rows) {
    r.lambda_lo = -limit;
    r.lambda_hi = limit;
  }
}

// ---------------------------------------------------------------------------
// Detection

inline std::optional<ContactPoint> sphere_plane(const RigidBodyState& b, int body, const Vec3& offset, double radius) {
  const Vec3 c = b.to_world(offset);
  const double pz = c.z() - radius;
  if (pz > 0.0) return std::nullopt;
  ContactPoint cp;
  cp.body = body;
  cp.other = kStatic;
  cp.point = Vec3(c.x(), c.y(), c.z() - radius);
  cp.normal = Vec3::UnitZ();
  cp.penetration = pz;
  cp.rel_vel = b.point_velocity(cp.point);
  return cp;
}

inline std::vector<ContactPoint> box_plane(const RigidBodyState& b, int body, const Vec3& half) {
  std::vector<ContactPoint> out;
  for (int i = 0; i < 8; ++i) {
    const Vec3 local((i & 1) ? half.x() : -half.x(), (i & 2) ? half.y() : -half.y(), (i & 4) ? half.z() : -half.z());
    const Vec3 p = b.to_world(local);
    if (p.z() > 0.0) continue;
    ContactPoint cp;
    cp.body = body;
    cp.other = kStatic;
    cp.point = p;
    cp.normal = Vec3::UnitZ();
    cp.penetration = p.z();
    cp.rel_vel = b.point_velocity(p);
    out.push_back(cp);
  }
  return out;
}

/// Sphere (on `sphere_body`) against an oriented box; the normal points from the box into the sphere.
inline std::optional<ContactPoint> sphere_box(const RigidBodyState& sb, int sphere_body, const Vec3& offset,
                                              double radius, const RigidBodyState& bb, int box_body,
                                              const Vec3& half) {
  const Vec3 c = sb.to_world(offset);
  const Vec3 local = bb.orientation.conjugate() * (c - bb.position);
  const Vec3 clamped = local.cwiseMax(-half).cwiseMin(half);
  Vec3 normal_local;
  double dist;
  Vec3 surface_local = clamped;
  if ((local - clamped).squaredNorm() > 1e-24) {
    const Vec3 d = local - clamped;
    dist = d.norm();
    normal_local = d / dist;
  } else {
    // Center inside the box: push out through the nearest face.
    int axis = 0;
    double best = kInf;
    for (int k = 0; k < 3; ++k) {
      const double gap = half(k) - std::abs(local(k));
      if (gap < best) {
        best = gap;
        axis = k;
      }
    }
    normal_local = Vec3::Zero();
    normal_local(axis) = local(axis) >= 0.0 ? 1.0 : -1.0;
    surface_local(axis) = normal_local(axis) * half(axis);
    dist = -best;
  }
  const double pen = dist - radius;
  if (pen > 0.0) return std::nullopt;
  ContactPoint cp;
  cp.body = sphere_body;
  cp.other = box_body;
  cp.normal = bb.orientation * normal_local;
  cp.point = bb.to_world(surface_local);
  cp.penetration = pen;
  cp.rel_vel = sb.point_velocity(cp.point) - bb.point_velocity(cp.point);
  return cp;
}

}  // namespace cobra::contact
