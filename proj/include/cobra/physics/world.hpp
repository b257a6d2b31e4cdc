#pragma once

#include "cobra/contact/contact.hpp"
#include "cobra/contact/friction.hpp"
#include "cobra/errors.hpp"
#include "cobra/physics/constraints.hpp"
#include "cobra/physics/math.hpp"
#include "cobra/physics/rigid_body.hpp"
#include "cobra/physics/solver.hpp"

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace cobra::physics {

/// How contacts against the ground plane are resolved.
enum class GroundModel {
  /// Compliant spring-damper normal force with Stribeck friction.
  PenaltyStribeck,
  /// Constraint contacts, tangential force bounded by a constant.
  PyramidConstant,
  /// Constraint contacts, tangential force bounded by mu |F_N|.
  PyramidNormal,
};

struct ContactSphere {
  int body = kStatic;
  Vec3 offset = Vec3::Zero();
  double radius = 0.05;
};

struct ContactBox {
  int body = kStatic;
  Vec3 half_extents = Vec3::Constant(0.1);
  contact::GroundParams ground;  // penalty-model ground parameters for this box
  double mu = 0.3;               // friction coefficient in the pyramid models
};

/// Resolved force at one contact during the last step (world frame).
struct ContactReport {
  contact::ContactPoint point;
  double normal_force = 0.0;
  Vec3 tangential_force = Vec3::Zero();
  /// Tangential components along the two friction directions.
  double tangential_1 = 0.0;
  double tangential_2 = 0.0;
  double friction_limit = 0.0;
};

struct StepDiagnostics {
  double residual = 0.0;
  int iterations = 0;
  bool converged = true;
  std::size_t row_count = 0;
};

/// Maximal-coordinate rigid-body world advanced with semi-implicit Euler.
///
/// Single-threaded; independent worlds share nothing and may live on different threads.
class World {
 public:
  Vec3 gravity{0.0, 0.0, -9.81};
  SolverSettings solver;
  /// Throw NonConvergence when the PGS tolerance is missed (otherwise only diverging residuals abort).
  bool strict_solver = false;

  bool ground_enabled = true;
  GroundModel ground_model = GroundModel::PenaltyStribeck;
  contact::GroundParams ground;
  /// mu for PyramidNormal, force limit (N) for PyramidConstant.
  double ground_mu = 0.5;
  contact::ContactRowParams contact_params;
  /// Friction coefficient between contact spheres and boxes.
  double sphere_box_mu = 0.5;

  int add_body(const RigidBodyState& b) {
    validate(b);
    bodies_.push_back(b);
    applied_.push_back(Vec6::Zero());
    return static_cast<int>(bodies_.size()) - 1;
  }

  int add_hinge(const HingeJoint& j) {
    validate(j, bodies_.size());
    joints_.push_back(j);
    joint_torque_.push_back(0.0);
    return static_cast<int>(joints_.size()) - 1;
  }

  void add_sphere(const ContactSphere& s) {
    if (s.body < 0 || static_cast<std::size_t>(s.body) >= bodies_.size()) throw ConfigError("sphere on missing body");
    if (!(s.radius > 0.0)) throw ConfigError("sphere radius must be > 0");
    spheres_.push_back(s);
  }

  void add_box(const ContactBox& b) {
    if (b.body < 0 || static_cast<std::size_t>(b.body) >= bodies_.size()) throw ConfigError("box on missing body");
    contact::validate(b.ground);
    boxes_.push_back(b);
  }

  std::span<const RigidBodyState> bodies() const { return bodies_; }
  RigidBodyState& body(std::size_t i) { return bodies_.at(i); }
  const RigidBodyState& body(std::size_t i) const { return bodies_.at(i); }
  std::span<const HingeJoint> joints() const { return joints_; }
  HingeJoint& joint(std::size_t i) { return joints_.at(i); }
  std::span<const ContactSphere> spheres() const { return spheres_; }
  std::span<const ContactBox> boxes() const { return boxes_; }

  /// Torque applied about joint j's axis during the next steps (+ on body b, - on body a).
  void set_joint_torque(std::size_t j, double u) { joint_torque_.at(j) = u; }
  double joint_torque(std::size_t j) const { return joint_torque_.at(j); }

  /// Persistent external wrench [force; torque] about the body's center of mass.
  void set_applied_wrench(std::size_t b, const Vec6& w) { applied_.at(b) = w; }

  double joint_angle(std::size_t j) const { return hinge_angle(joints_.at(j), bodies_); }
  double joint_rate(std::size_t j) const { return hinge_rate(joints_.at(j), bodies_); }

  const std::vector<ContactReport>& last_contacts() const { return contacts_; }
  const StepDiagnostics& last_step() const { return diag_; }
  double time() const { return time_; }

  /// Bilateral joint rows plus any active limit rows, in joint order.
  std::vector<ConstraintRow> assemble_constraints(double h) const {
    std::vector<ConstraintRow> rows;
    rows.reserve(joints_.size() * 5);
    for (std::size_t j = 0; j < joints_.size(); ++j) {
      auto jr = hinge_rows(joints_[j], bodies_, h, joint_key(j, 0));
      rows.insert(rows.end(), jr.begin(), jr.end());
      if (auto lim = hinge_limit_row(joints_[j], bodies_, h, 0.0, joint_key(j, 5))) rows.push_back(*lim);
    }
    return rows;
  }

  double kinetic_energy() const {
    double e = 0.0;
    for (const auto& b : bodies_)
      e += 0.5 * b.mass * b.lin_vel.squaredNorm() + 0.5 * b.ang_vel.dot(b.rotation() * b.inertia_body * b.rotation().transpose() * b.ang_vel);
    return e;
  }

  double potential_energy() const {
    double e = 0.0;
    for (const auto& b : bodies_) e -= b.mass * gravity.dot(b.position);
    return e;
  }

  Vec3 linear_momentum() const {
    Vec3 p = Vec3::Zero();
    for (const auto& b : bodies_) p += b.mass * b.lin_vel;
    return p;
  }

  double total_mass() const {
    double m = 0.0;
    for (const auto& b : bodies_) m += b.mass;
    return m;
  }

  void step(double h);

 private:
  static std::uint64_t joint_key(std::size_t j, std::size_t k) { return 1 + j * 8 + k; }
  static std::uint64_t ground_key(std::size_t s, std::size_t k) { return (1ull << 40) + s * 4 + k; }
  static std::uint64_t corner_key(std::size_t b, std::size_t c, std::size_t k) {
    return (2ull << 40) + (b * 8 + c) * 4 + k;
  }
  static std::uint64_t sphere_box_key(std::size_t s, std::size_t b, std::size_t k) {
    return (3ull << 40) + (s * 64 + b) * 4 + k;
  }

  void add_wrench_at(std::vector<Vec6>& f, int body, const Vec3& point, const Vec3& force) const {
    if (body == kStatic) return;
    auto& w = f[static_cast<std::size_t>(body)];
    w.head<3>() += force;
    w.tail<3>() += (point - bodies_[static_cast<std::size_t>(body)].position).cross(force);
  }

  std::vector<RigidBodyState> bodies_;
  std::vector<Vec6> applied_;
  std::vector<HingeJoint> joints_;
  std::vector<double> joint_torque_;
  std::vector<ContactSphere> spheres_;
  std::vector<ContactBox> boxes_;
  std::vector<ContactReport> contacts_;
  std::unordered_map<std::uint64_t, double> warm_;
  StepDiagnostics diag_;
  double time_ = 0.0;
};

namespace detail {

/// Contact whose rows occupy [first, first+3) or, for penalty contacts, two friction rows.
struct ContactSlot {
  contact::ContactPoint point;
  std::size_t first = 0;
  bool penalty = false;
  bool normal_scaled = false;
  double mu = 0.0;  // friction coefficient, or viscous coefficient for penalty contacts
  double penalty_normal = 0.0;
};

}  // namespace detail

inline void World::step(double h) {
  if (!(h > 0.0)) throw ConfigError("step size must be > 0");
  const std::size_t nb = bodies_.size();

  std::vector<InverseMass> inv(nb);
  for (std::size_t i = 0; i < nb; ++i) inv[i] = InverseMass::of(bodies_[i]);

  std::vector<Vec6> force(applied_);
  for (std::size_t i = 0; i < nb; ++i) force[i].head<3>() += bodies_[i].mass * gravity;
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    const double u = joint_torque_[j];
    if (u == 0.0) continue;
    const Vec3 t = u * hinge_axis_world(joints_[j], bodies_);
    if (joints_[j].body_b != kStatic) force[static_cast<std::size_t>(joints_[j].body_b)].tail<3>() += t;
    if (joints_[j].body_a != kStatic) force[static_cast<std::size_t>(joints_[j].body_a)].tail<3>() -= t;
  }

  std::vector<ConstraintRow> rows = assemble_constraints(h);
  std::vector<detail::ContactSlot> slots;

  contact::ContactRowParams cparams = contact_params;
  cparams.h = h;

  auto add_ground_contact = [&](const contact::ContactPoint& cp, const contact::GroundParams& gp, double mu,
                                auto key_of) {
    detail::ContactSlot slot;
    slot.point = cp;
    slot.first = rows.size();
    if (ground_model == GroundModel::PenaltyStribeck) {
      // Normal and viscous terms act as explicit forces; the Stribeck-Coulomb
      // term becomes a zero-slip row bounded by s(|v|) F_z per axis (the
      // implicit form of -s F_z sgn(v)).
      const double fz = contact::normal_force(cp.penetration, cp.rel_vel.z(), gp);
      slot.penalty = true;
      slot.penalty_normal = fz;
      slot.mu = gp.mu_v;
      Vec3 f(-gp.mu_v * cp.rel_vel.x(), -gp.mu_v * cp.rel_vel.y(), fz);
      add_wrench_at(force, cp.body, cp.point, f);
      if (fz <= 0.0) {
        slot.first = rows.size();
        slots.push_back(slot);
        return;
      }
      for (int axis = 0; axis < 2; ++axis) {
        ConstraintRow r = contact::directional_row(cp, bodies_, Vec3::Unit(axis));
        const double limit = contact::stribeck_coefficient(std::abs(cp.rel_vel(axis)), gp) * fz;
        r.lambda_lo = -limit;
        r.lambda_hi = limit;
        r.key = key_of(static_cast<std::size_t>(axis + 1));
        rows.push_back(r);
      }
    } else {
      const auto mode = ground_model == GroundModel::PyramidConstant ? contact::PyramidMode::ConstantLimit
                                                                     : contact::PyramidMode::NormalScaled;
      auto cr = contact::contact_rows(cp, mu, mode, bodies_, cparams);
      for (std::size_t k = 0; k < cr.size(); ++k) cr[k].key = key_of(k);
      slot.normal_scaled = mode == contact::PyramidMode::NormalScaled;
      slot.mu = mu;
      rows.insert(rows.end(), cr.begin(), cr.end());
    }
    slots.push_back(slot);
  };

  if (ground_enabled) {
    for (std::size_t s = 0; s < spheres_.size(); ++s) {
      const auto& sp = spheres_[s];
      const auto& b = bodies_[static_cast<std::size_t>(sp.body)];
      if (auto cp = contact::sphere_plane(b, sp.body, sp.offset, sp.radius))
        add_ground_contact(*cp, ground, ground_mu, [&](std::size_t k) { return ground_key(s, k); });
    }
    for (std::size_t bi = 0; bi < boxes_.size(); ++bi) {
      const auto& bx = boxes_[bi];
      const auto& b = bodies_[static_cast<std::size_t>(bx.body)];
      auto corners = contact::box_plane(b, bx.body, bx.half_extents);
      std::size_t c = 0;
      for (const auto& cp : corners) {
        const std::size_t corner = c++;
        add_ground_contact(cp, bx.ground, ground_model == GroundModel::PyramidNormal ? bx.mu : ground_mu,
                           [&](std::size_t k) { return corner_key(bi, corner, k); });
      }
    }
  }

  for (std::size_t s = 0; s < spheres_.size(); ++s) {
    const auto& sp = spheres_[s];
    for (std::size_t bi = 0; bi < boxes_.size(); ++bi) {
      const auto& bx = boxes_[bi];
      if (bx.body == sp.body) continue;
      auto cp = contact::sphere_box(bodies_[static_cast<std::size_t>(sp.body)], sp.body, sp.offset, sp.radius,
                                    bodies_[static_cast<std::size_t>(bx.body)], bx.body, bx.half_extents);
      if (!cp) continue;
      detail::ContactSlot slot;
      slot.point = *cp;
      slot.first = rows.size();
      slot.normal_scaled = true;
      slot.mu = sphere_box_mu;
      auto cr = contact::contact_rows(*cp, sphere_box_mu, contact::PyramidMode::NormalScaled, bodies_, cparams);
      for (std::size_t k = 0; k < cr.size(); ++k) cr[k].key = sphere_box_key(s, bi, k);
      rows.insert(rows.end(), cr.begin(), cr.end());
      slots.push_back(slot);
    }
  }

  std::vector<Vec6> v_free(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    Vec6 v;
    v << bodies_[i].lin_vel, bodies_[i].ang_vel;
    v_free[i] = v + h * inv[i].apply(force[i]);
  }

  auto warm_for = [&](std::span<const ConstraintRow> rs) {
    std::vector<double> w(rs.size(), 0.0);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (rs[i].key == 0) continue;
      auto it = warm_.find(rs[i].key);
      if (it != warm_.end()) w[i] = it->second;
    }
    return w;
  };

  // Normal-scaled friction rows are bounded by mu |lambda_n| of their normal row, re-evaluated on every sweep.
  for (const auto& sl : slots) {
    if (!sl.normal_scaled) continue;
    for (std::size_t k = 1; k < 3; ++k) {
      rows[sl.first + k].friction_of = static_cast<int>(sl.first);
      rows[sl.first + k].mu = sl.mu;
    }
  }
  const SolveResult result = solve(rows, inv, v_free, h, solver, warm_for(rows));
  const std::vector<double>& lambdas = result.lambdas;
  for (const auto& sl : slots)
    if (sl.normal_scaled)
      contact::set_pyramid_bounds(std::span<ConstraintRow>(rows).subspan(sl.first + 1, 2), lambdas[sl.first], sl.mu);

  diag_ = {result.residual, result.iterations, result.converged, rows.size()};
  if (!std::isfinite(result.residual)) throw NonConvergence(result.residual, result.iterations);
  if (strict_solver && !result.converged) throw NonConvergence(result.residual, result.iterations);

  std::vector<Vec6> cforce(nb, Vec6::Zero());
  accumulate_constraint_forces(rows, lambdas, cforce);

  warm_.clear();
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].key != 0) warm_[rows[i].key] = lambdas[i];

  contacts_.clear();
  for (const auto& s : slots) {
    ContactReport rep;
    rep.point = s.point;
    Vec3 t1, t2;
    if (s.penalty) {
      t1 = Vec3::UnitX();
      t2 = Vec3::UnitY();
      rep.normal_force = s.penalty_normal;
      if (s.penalty_normal > 0.0) {
        rep.tangential_1 = lambdas[s.first];
        rep.tangential_2 = lambdas[s.first + 1];
        rep.friction_limit = rows[s.first].lambda_hi;
      }
      rep.tangential_1 -= s.mu * s.point.rel_vel.x();
      rep.tangential_2 -= s.mu * s.point.rel_vel.y();
    } else {
      contact::tangent_basis(s.point.normal, t1, t2);
      rep.normal_force = lambdas[s.first];
      rep.tangential_1 = lambdas[s.first + 1];
      rep.tangential_2 = lambdas[s.first + 2];
      rep.friction_limit = rows[s.first + 1].lambda_hi;
    }
    rep.tangential_force = rep.tangential_1 * t1 + rep.tangential_2 * t2;
    contacts_.push_back(rep);
  }

  for (std::size_t i = 0; i < nb; ++i) {
    RigidBodyState& b = bodies_[i];
    const Vec6 v = v_free[i] + h * inv[i].apply(cforce[i]);
    b.lin_vel = v.head<3>();
    b.ang_vel = v.tail<3>();
    b.position += h * b.lin_vel;
    const Quat dq(0.0, b.ang_vel.x(), b.ang_vel.y(), b.ang_vel.z());
    Quat q = b.orientation;
    q.coeffs() += 0.5 * h * (dq * q).coeffs();
    b.orientation = q.normalized();
    if (!b.position.allFinite() || !b.lin_vel.allFinite() || !b.ang_vel.allFinite() ||
        !b.orientation.coeffs().allFinite())
      throw NanDetected(i);
  }
  time_ += h;
}

}  // namespace cobra::physics
