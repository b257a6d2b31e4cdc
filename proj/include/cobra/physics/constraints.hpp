#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/math.hpp"
#include "cobra/physics/rigid_body.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cobra::physics {

inline constexpr int kStatic = -1;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Spring-damper description of a soft constraint at step size h.
struct SoftParams {
  double h = 1e-3;
  double kp = 0.0;
  double kd = 0.0;
};

struct ErpCfm {
  double erp = 0.0;
  double cfm = 0.0;
};

/// Converts spring/damper constants to the ERP/CFM pair that reproduces an
/// implicitly integrated spring-damper at step size h.
inline ErpCfm erp_cfm_from_spring(const SoftParams& soft) {
  if (!(soft.h > 0.0)) throw DegenerateParameters("step size must be > 0");
  if (soft.kp < 0.0 || soft.kd < 0.0) throw DegenerateParameters("kp and kd must be >= 0");
  const double denom = soft.h * soft.kp + soft.kd;
  if (!(denom > 0.0)) throw DegenerateParameters("h*kp + kd must be > 0");
  return {soft.h * soft.kp / denom, 1.0 / denom};
}

/// One scalar velocity-level constraint  J v = rhs  with force bounds.
///
/// Jacobian blocks are ordered [linear(3); angular(3)] per body.
/// A body index of kStatic means the row only acts on the other body.
struct ConstraintRow {
  int body_a = kStatic;
  int body_b = kStatic;
  Vec6 jac_a = Vec6::Zero();
  Vec6 jac_b = Vec6::Zero();
  double rhs = 0.0;
  double cfm = 0.0;
  double lambda_lo = -kInf;
  double lambda_hi = kInf;
  /// Stable identity used to warm-start the solver across steps (0 = none).
  std::uint64_t key = 0;
  /// When >= 0, the bounds are +-mu |lambda| of that row, re-evaluated on every solver sweep.
  int friction_of = -1;
  double mu = 0.0;
};

inline void validate(const ConstraintRow& r) {
  if (!(r.lambda_lo <= r.lambda_hi)) throw ConfigError("constraint row with lambda_lo > lambda_hi");
  if (!(r.cfm >= 0.0)) throw ConfigError("constraint row with negative cfm");
  if (r.friction_of >= 0 && !(r.mu >= 0.0)) throw ConfigError("friction row with negative mu");
}

struct JointLimits {
  double lo = 0.0;
  double hi = 0.0;
};

/// Revolute joint between two bodies; anchors and axes are given in each body's frame.
struct HingeJoint {
  int body_a = kStatic;
  int body_b = kStatic;
  Vec3 anchor_a = Vec3::Zero();
  Vec3 anchor_b = Vec3::Zero();
  Vec3 axis_a = Vec3::UnitZ();
  Vec3 axis_b = Vec3::UnitZ();
  double erp = 0.2;
  double cfm = 1e-7;
  std::optional<JointLimits> limits;
  /// Relative orientation conj(q_a) * q_b at which the joint angle reads zero.
  Quat rest_relative = Quat::Identity();
};

inline void validate(const HingeJoint& j, std::size_t body_count) {
  auto valid_index = [&](int i) { return i == kStatic || (i >= 0 && static_cast<std::size_t>(i) < body_count); };
  if (!valid_index(j.body_a) || !valid_index(j.body_b) || j.body_a == j.body_b)
    throw ConfigError("hinge references a missing body");
  if (std::abs(j.axis_a.norm() - 1.0) > 1e-9 || std::abs(j.axis_b.norm() - 1.0) > 1e-9)
    throw ConfigError("hinge axes must be unit vectors");
  if (j.erp < 0.0 || j.erp > 1.0) throw ConfigError("hinge erp must lie in [0, 1]");
  if (j.cfm < 0.0) throw ConfigError("hinge cfm must be >= 0");
  if (j.limits && j.limits->lo > j.limits->hi) throw ConfigError("hinge limit_lo > limit_hi");
}

namespace detail {

inline const RigidBodyState* body_or_null(std::span<const RigidBodyState> bodies, int i) {
  return i == kStatic ? nullptr : &bodies[static_cast<std::size_t>(i)];
}

inline Quat orientation_of(const RigidBodyState* b) { return b ? b->orientation : Quat::Identity(); }

inline Vec3 world_point(const RigidBodyState* b, const Vec3& local) {
  return b ? b->to_world(local) : local;
}

inline Vec3 angular_velocity(const RigidBodyState* b) { return b ? b->ang_vel : Vec3::Zero(); }

}  // namespace detail

/// World-frame hinge axis, taken from body a.
inline Vec3 hinge_axis_world(const HingeJoint& j, std::span<const RigidBodyState> bodies) {
  return detail::orientation_of(detail::body_or_null(bodies, j.body_a)) * j.axis_a;
}

/// Joint angle of b relative to a about the hinge axis, in (-pi, pi].
inline double hinge_angle(const HingeJoint& j, std::span<const RigidBodyState> bodies) {
  const Quat qa = detail::orientation_of(detail::body_or_null(bodies, j.body_a));
  const Quat qb = detail::orientation_of(detail::body_or_null(bodies, j.body_b));
  const Quat rel = j.rest_relative.conjugate() * qa.conjugate() * qb;
  return twist_angle(rel.normalized(), j.axis_a);
}

inline double hinge_rate(const HingeJoint& j, std::span<const RigidBodyState> bodies) {
  const Vec3 w = detail::angular_velocity(detail::body_or_null(bodies, j.body_b)) -
                 detail::angular_velocity(detail::body_or_null(bodies, j.body_a));
  return w.dot(hinge_axis_world(j, bodies));
}

/// The five bilateral rows of a hinge: three anchor-coincidence rows along the
/// world axes followed by two rows keeping the axes aligned. Each rhs carries
/// (erp/h) times the positional error being corrected.
inline std::vector<ConstraintRow> hinge_rows(const HingeJoint& j, std::span<const RigidBodyState> bodies,
                                             double h, std::uint64_t key_base = 0) {
  const RigidBodyState* a = detail::body_or_null(bodies, j.body_a);
  const RigidBodyState* b = detail::body_or_null(bodies, j.body_b);
  const Vec3 pa = detail::world_point(a, j.anchor_a);
  const Vec3 pb = detail::world_point(b, j.anchor_b);
  const Vec3 ra = a ? Vec3(pa - a->position) : Vec3::Zero();
  const Vec3 rb = b ? Vec3(pb - b->position) : Vec3::Zero();
  const double k = j.erp / h;

  std::vector<ConstraintRow> rows;
  rows.reserve(5);
  const Vec3 correction = pa - pb;
  for (int d = 0; d < 3; ++d) {
    ConstraintRow r;
    r.body_a = j.body_a;
    r.body_b = j.body_b;
    const Vec3 e = Vec3::Unit(d);
    // e . d/dt (pb - pa) = e . (vb + wb x rb - va - wa x ra)
    r.jac_a.head<3>() = -e;
    r.jac_a.tail<3>() = -ra.cross(e);
    r.jac_b.head<3>() = e;
    r.jac_b.tail<3>() = rb.cross(e);
    r.rhs = k * correction(d);
    r.cfm = j.cfm;
    r.key = key_base ? key_base + static_cast<std::uint64_t>(d) : 0;
    rows.push_back(r);
  }

  const Vec3 axis_a = detail::orientation_of(a) * j.axis_a;
  const Vec3 axis_b = detail::orientation_of(b) * j.axis_b;
  Vec3 p, q;
  orthonormal_basis(axis_a, p, q);
  const Vec3 rot_error = axis_b.cross(axis_a);
  for (int d = 0; d < 2; ++d) {
    const Vec3& dir = d == 0 ? p : q;
    ConstraintRow r;
    r.body_a = j.body_a;
    r.body_b = j.body_b;
    r.jac_a.head<3>().setZero();
    r.jac_a.tail<3>() = -dir;
    r.jac_b.head<3>().setZero();
    r.jac_b.tail<3>() = dir;
    r.rhs = k * rot_error.dot(dir);
    r.cfm = j.cfm;
    r.key = key_base ? key_base + 3 + static_cast<std::uint64_t>(d) : 0;
    rows.push_back(r);
  }
  return rows;
}

/// Unilateral limit row when the joint angle is within `margin` of a limit, otherwise nothing.
inline std::optional<ConstraintRow> hinge_limit_row(const HingeJoint& j, std::span<const RigidBodyState> bodies,
                                                    double h, double margin = 0.0, std::uint64_t key = 0) {
  if (!j.limits) return std::nullopt;
  const double angle = hinge_angle(j, bodies);
  const Vec3 axis = hinge_axis_world(j, bodies);
  ConstraintRow r;
  r.body_a = j.body_a;
  r.body_b = j.body_b;
  r.jac_a.head<3>().setZero();
  r.jac_b.head<3>().setZero();
  r.cfm = j.cfm;
  r.key = key;
  if (angle < j.limits->lo + margin) {
    // d(angle)/dt >= erp/h * (lo - angle)
    r.jac_a.tail<3>() = -axis;
    r.jac_b.tail<3>() = axis;
    r.rhs = (j.erp / h) * std::max(0.0, j.limits->lo - angle);
    r.lambda_lo = 0.0;
    r.lambda_hi = kInf;
    return r;
  }
  if (angle > j.limits->hi - margin) {
    r.jac_a.tail<3>() = axis;
    r.jac_b.tail<3>() = -axis;
    r.rhs = (j.erp / h) * std::max(0.0, angle - j.limits->hi);
    r.lambda_lo = 0.0;
    r.lambda_hi = kInf;
    return r;
  }
  return std::nullopt;
}

}  // namespace cobra::physics
