#include "cobra/physics/world.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cobra;
using namespace cobra::physics;

namespace {

/// One body sliding on x with a soft positional constraint x = 0 expressed through ERP/CFM.
struct SoftDof {
  double m, h;
  ErpCfm ec;
  double x = 1.0, v = 0.0;

  void step() {
    ConstraintRow r;
    r.body_b = 0;
    r.jac_b(0) = 1.0;
    r.rhs = -(ec.erp / h) * x;
    r.cfm = ec.cfm;
    const InverseMass im{1.0 / m, Mat3::Identity()};
    Vec6 vf = Vec6::Zero();
    vf(0) = v;
    SolverSettings s;
    s.tolerance = 1e-15;
    const auto res = solve_pgs(std::span(&r, 1), std::span(&im, 1), std::span(&vf, 1), h, s);
    v += h * res.lambdas[0] / m;
    x += h * v;
  }
};

}  // namespace

TEST(ErpCfm, FormulaValues) {
  const auto ec = erp_cfm_from_spring({0.01, 1000.0, 10.0});
  EXPECT_NEAR(ec.erp, 10.0 / 20.0, 1e-15);
  EXPECT_NEAR(ec.cfm, 1.0 / 20.0, 1e-15);
}

TEST(ErpCfm, DegenerateInputsThrow) {
  EXPECT_THROW(erp_cfm_from_spring({0.0, 1.0, 1.0}), DegenerateParameters);
  EXPECT_THROW(erp_cfm_from_spring({0.01, 0.0, 0.0}), DegenerateParameters);
  EXPECT_THROW(erp_cfm_from_spring({0.01, -1.0, 1.0}), DegenerateParameters);
}

TEST(ErpCfm, MatchesImplicitSpringDamper) {
  for (double m : {0.5, 1.0, 3.0}) {
    SoftDof d{m, 0.01, erp_cfm_from_spring({0.01, 1000.0, 10.0})};
    oracle::SpringDamper o{m, 1000.0, 10.0, 0.01};
    double x = d.x, v = d.v, err = 0.0, peak = std::abs(x);
    for (int k = 0; k < 1000; ++k) {
      d.step();
      o.step(x, v);
      err = std::max(err, std::abs(d.x - x));
      peak = std::max(peak, std::abs(x));
    }
    EXPECT_LE(err / peak, 1e-6) << "m=" << m;
  }
}

TEST(Pgs, MatchesDenseSolve) {
  std::mt19937_64 rng(11);
  for (int c = 0; c < 100; ++c) {
    auto sys = oracle::random_system(rng, 6, 1 + c % 12);
    SolverSettings s;
    s.max_iterations = 20000;
    s.tolerance = 1e-15;
    const auto res = solve_pgs(sys.rows, sys.inv, sys.v_free, sys.h, s);
    const auto d = oracle::dense_system(sys.rows, sys.inv, sys.v_free, sys.h);
    const VecX lam = Eigen::Map<const VecX>(res.lambdas.data(), static_cast<Eigen::Index>(res.lambdas.size()));
    EXPECT_LE((d.A * lam - d.b).norm() / d.b.norm(), 1e-8) << "case " << c;
  }
}

TEST(Pgs, RespectsBounds) {
  std::mt19937_64 rng(3);
  auto sys = oracle::random_system(rng, 4, 10);
  for (auto& r : sys.rows) {
    r.lambda_lo = -0.5;
    r.lambda_hi = 0.25;
  }
  const auto res = solve_pgs(sys.rows, sys.inv, sys.v_free, sys.h);
  for (double l : res.lambdas) {
    EXPECT_GE(l, -0.5);
    EXPECT_LE(l, 0.25);
  }
}

TEST(Pgs, LcpComplementarityOnUnilateralRows) {
  std::mt19937_64 rng(5);
  auto sys = oracle::random_system(rng, 6, 8);
  for (auto& r : sys.rows) r.lambda_lo = 0.0;
  SolverSettings s;
  s.max_iterations = 20000;
  s.tolerance = 1e-14;
  const auto res = solve_pgs(sys.rows, sys.inv, sys.v_free, sys.h, s);
  const auto d = oracle::dense_system(sys.rows, sys.inv, sys.v_free, sys.h);
  const VecX lam = Eigen::Map<const VecX>(res.lambdas.data(), static_cast<Eigen::Index>(res.lambdas.size()));
  const VecX w = d.A * lam - d.b;
  const double scale = d.b.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    EXPECT_GE(lam(i), 0.0);
    EXPECT_GE(w(i), -1e-7 * scale);
    EXPECT_LE(std::abs(lam(i) * w(i)), 1e-7 * scale * std::max(1.0, lam.cwiseAbs().maxCoeff()));
  }
}

TEST(Pgs, EmptySystem) {
  const auto res = solve_pgs({}, {}, {}, 1e-3);
  EXPECT_TRUE(res.lambdas.empty());
  EXPECT_TRUE(res.converged);
}

TEST(Pgs, NonConvergenceIsReported) {
  std::mt19937_64 rng(9);
  auto sys = oracle::random_system(rng, 2, 12);
  SolverSettings s;
  s.max_iterations = 2;
  s.tolerance = 1e-15;
  EXPECT_THROW(solve_constraints(sys.rows, sys.inv, sys.v_free, sys.h, s), NonConvergence);
}

TEST(SchurPgs, AgreesWithPgsOnBilateralRows) {
  std::mt19937_64 rng(21);
  for (int c = 0; c < 20; ++c) {
    auto sys = oracle::random_system(rng, 6, 2 + c % 10);
    SolverSettings s;
    s.max_iterations = 20000;
    s.tolerance = 1e-15;
    s.kind = SolverKind::SchurProjectedGaussSeidel;
    const auto res = solve(sys.rows, sys.inv, sys.v_free, sys.h, s);
    const auto d = oracle::dense_system(sys.rows, sys.inv, sys.v_free, sys.h);
    const VecX lam = Eigen::Map<const VecX>(res.lambdas.data(), static_cast<Eigen::Index>(res.lambdas.size()));
    EXPECT_LE((d.A * lam - d.b).norm() / d.b.norm(), 1e-8) << "case " << c;
  }
}

TEST(RigidBody, ValidationRejectsBadInertia) {
  RigidBodyState b;
  b.mass = 0.0;
  EXPECT_THROW(validate(b), ConfigError);
  b.mass = 1.0;
  b.inertia_body = Mat3::Identity();
  b.inertia_body(0, 0) = -1.0;
  EXPECT_THROW(validate(b), ConfigError);
}

TEST(World, FreeFallMatchesSemiImplicitEuler) {
  World w;
  w.ground_enabled = false;
  RigidBodyState b;
  b.position = Vec3(0, 0, 10);
  b.lin_vel = Vec3(1, 0, 0);
  w.add_body(b);
  const double h = 1e-3;
  double z = 10.0, vz = 0.0;
  for (int k = 0; k < 1000; ++k) {
    w.step(h);
    vz -= 9.81 * h;
    z += h * vz;
  }
  EXPECT_NEAR(w.body(0).position.z(), z, 1e-9);
  EXPECT_NEAR(w.body(0).position.x(), 1.0, 1e-9);
}

TEST(World, TorqueFreeSpinConservesMomentum) {
  World w;
  w.ground_enabled = false;
  w.gravity.setZero();
  RigidBodyState b;
  b.inertia_body = box_inertia(1.0, Vec3(0.3, 0.2, 0.1));
  b.ang_vel = Vec3(0.1, 2.0, 0.05);
  b.lin_vel = Vec3(0.2, -0.1, 0.0);
  w.add_body(b);
  const Vec3 p0 = w.linear_momentum();
  for (int k = 0; k < 2000; ++k) w.step(1e-3);
  EXPECT_LE((w.linear_momentum() - p0).norm(), 1e-12);
}

TEST(World, HingeKeepsAnchorsTogether) {
  World w;
  w.ground_enabled = false;
  RigidBodyState a, b;
  a.inertia_body = b.inertia_body = cylinder_inertia_x(1.0, 0.04, 0.1);
  b.position = Vec3(0.1, 0, 0);
  const int ia = w.add_body(a), ib = w.add_body(b);
  HingeJoint j;
  j.body_a = ia;
  j.body_b = ib;
  j.anchor_a = Vec3(0.05, 0, 0);
  j.anchor_b = Vec3(-0.05, 0, 0);
  j.axis_a = j.axis_b = Vec3::UnitY();
  w.add_hinge(j);
  w.body(0).ang_vel = Vec3(0.5, 0.0, 1.0);
  w.set_joint_torque(0, 0.01);
  for (int k = 0; k < 1000; ++k) w.step(1e-3);
  const Vec3 pa = w.body(0).to_world(j.anchor_a), pb = w.body(1).to_world(j.anchor_b);
  EXPECT_LE((pa - pb).norm(), 1e-3);
  const Vec3 axa = w.body(0).orientation * j.axis_a, axb = w.body(1).orientation * j.axis_b;
  EXPECT_LE(axa.cross(axb).norm(), 1e-3);
}

TEST(World, RejectsMissingBodies) {
  World w;
  EXPECT_THROW(w.add_sphere({3, Vec3::Zero(), 0.05}), ConfigError);
  HingeJoint j;
  j.body_a = 0;
  j.body_b = 1;
  EXPECT_THROW(w.add_hinge(j), ConfigError);
}
