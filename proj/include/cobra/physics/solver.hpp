#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/constraints.hpp"
#include "cobra/physics/math.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace cobra::physics {

enum class SolverKind {
  /// Projected Gauss-Seidel over every row.
  ProjectedGaussSeidel,
  /// Bilateral rows eliminated exactly; projected Gauss-Seidel on the bounded rows.
  SchurProjectedGaussSeidel,
};

struct SolverSettings {
  int max_iterations = 64;
  double tolerance = 1e-8;
  SolverKind kind = SolverKind::ProjectedGaussSeidel;
};

struct SolveResult {
  std::vector<double> lambdas;
  double residual = 0.0;
  int iterations = 0;
  bool converged = true;
};

/// Inverse mass properties of a body in the world frame.
struct InverseMass {
  double inv_mass = 0.0;
  Mat3 inv_inertia = Mat3::Zero();

  static InverseMass of(const RigidBodyState& b) { return {1.0 / b.mass, b.inv_inertia_world()}; }

  Vec6 apply(const Vec6& f) const {
    Vec6 out;
    out.head<3>() = inv_mass * f.head<3>();
    out.tail<3>() = inv_inertia * f.tail<3>();
    return out;
  }
};

namespace detail {

/// Current bounds of row i; friction rows follow their normal row's multiplier.
inline std::pair<double, double> row_bounds(const ConstraintRow& r, std::span<const double> lambdas) {
  if (r.friction_of < 0) return {r.lambda_lo, r.lambda_hi};
  const double lim = r.mu * std::abs(lambdas[static_cast<std::size_t>(r.friction_of)]);
  return {-lim, lim};
}

}  // namespace detail

/// Projected Gauss-Seidel on  (J M^-1 J^T + CFM/h) lambda = (rhs - J v_free) / h
/// subject to lambda_lo <= lambda <= lambda_hi.
///
/// `free_velocity` holds each body's velocity [v; w] after external forces and
/// before constraint forces. The applied constraint force on a body is J^T lambda.
/// `warm_start`, when non-empty, seeds lambda (clamped to the row bounds).
inline SolveResult solve_pgs(std::span<const ConstraintRow> rows, std::span<const InverseMass> inv_mass,
                             std::span<const Vec6> free_velocity, double h, const SolverSettings& settings = {},
                             std::span<const double> warm_start = {}) {
  const std::size_t n = rows.size();
  SolveResult out;
  out.lambdas.assign(n, 0.0);
  if (n == 0) return out;

  std::vector<Vec6> acc(inv_mass.size(), Vec6::Zero());  // sum of M^-1 J^T lambda per body
  std::vector<Vec6> ba(n), bb(n);
  std::vector<double> diag(n), bias(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ConstraintRow& r = rows[i];
    double d = r.cfm / h;
    double jv = 0.0;
    if (r.body_a != kStatic) {
      const auto a = static_cast<std::size_t>(r.body_a);
      ba[i] = inv_mass[a].apply(r.jac_a);
      d += r.jac_a.dot(ba[i]);
      jv += r.jac_a.dot(free_velocity[a]);
    }
    if (r.body_b != kStatic) {
      const auto b = static_cast<std::size_t>(r.body_b);
      bb[i] = inv_mass[b].apply(r.jac_b);
      d += r.jac_b.dot(bb[i]);
      jv += r.jac_b.dot(free_velocity[b]);
    }
    diag[i] = d;
    bias[i] = (r.rhs - jv) / h;
  }
  if (!warm_start.empty()) {
    for (std::size_t i = 0; i < n; ++i)
      if (rows[i].friction_of < 0) out.lambdas[i] = std::clamp(warm_start[i], rows[i].lambda_lo, rows[i].lambda_hi);
    for (std::size_t i = 0; i < n; ++i) {
      const ConstraintRow& r = rows[i];
      if (r.friction_of >= 0) {
        const auto [lo, hi] = detail::row_bounds(r, out.lambdas);
        out.lambdas[i] = std::clamp(warm_start[i], lo, hi);
      }
      const double l = out.lambdas[i];
      if (r.body_a != kStatic) acc[static_cast<std::size_t>(r.body_a)] += ba[i] * l;
      if (r.body_b != kStatic) acc[static_cast<std::size_t>(r.body_b)] += bb[i] * l;
    }
  }

  out.converged = false;
  for (int it = 0; it < settings.max_iterations; ++it) {
    double max_delta = 0.0;
    double max_lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const ConstraintRow& r = rows[i];
      if (!(diag[i] > 0.0)) continue;
      double ja = 0.0;
      if (r.body_a != kStatic) ja += r.jac_a.dot(acc[static_cast<std::size_t>(r.body_a)]);
      if (r.body_b != kStatic) ja += r.jac_b.dot(acc[static_cast<std::size_t>(r.body_b)]);
      const double old = out.lambdas[i];
      const double res = bias[i] - ja - (r.cfm / h) * old;
      const auto [lo, hi] = detail::row_bounds(r, out.lambdas);
      const double next = std::clamp(old + res / diag[i], lo, hi);
      const double delta = next - old;
      if (delta != 0.0) {
        out.lambdas[i] = next;
        if (r.body_a != kStatic) acc[static_cast<std::size_t>(r.body_a)] += ba[i] * delta;
        if (r.body_b != kStatic) acc[static_cast<std::size_t>(r.body_b)] += bb[i] * delta;
      }
      max_delta = std::max(max_delta, std::abs(delta));
      max_lambda = std::max(max_lambda, std::abs(next));
    }
    out.iterations = it + 1;
    out.residual = max_delta / std::max(max_lambda, 1e-9);
    if (!std::isfinite(out.residual)) break;
    if (out.residual <= settings.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

namespace detail {

/// In-place Cholesky of an SPD matrix whose rows have a known first-nonzero
/// column (envelope storage inside a dense matrix). Chains give a narrow envelope.
class EnvelopeCholesky {
 public:
  bool factor(const MatX& a) {
    const Eigen::Index n = a.rows();
    l_.setZero(n, n);
    first_.assign(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index f = i;
      for (Eigen::Index j = 0; j < i; ++j) {
        if (a(i, j) != 0.0) {
          f = j;
          break;
        }
      }
      first_[static_cast<std::size_t>(i)] = f;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index fi = first_[static_cast<std::size_t>(i)];
      for (Eigen::Index j = fi; j < i; ++j) {
        const Eigen::Index k0 = std::max(fi, first_[static_cast<std::size_t>(j)]);
        double s = a(i, j);
        for (Eigen::Index k = k0; k < j; ++k) s -= l_(i, k) * l_(j, k);
        l_(i, j) = s / l_(j, j);
      }
      double d = a(i, i);
      for (Eigen::Index k = fi; k < i; ++k) d -= l_(i, k) * l_(i, k);
      if (!(d > 0.0)) return false;
      l_(i, i) = std::sqrt(d);
    }
    return true;
  }

  /// Solves A x = b in place.
  void solve(Eigen::Ref<VecX> x) const {
    const Eigen::Index n = l_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = x(i);
      for (Eigen::Index k = first_[static_cast<std::size_t>(i)]; k < i; ++k) s -= l_(i, k) * x(k);
      x(i) = s / l_(i, i);
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      x(i) /= l_(i, i);
      const double xi = x(i);
      for (Eigen::Index k = first_[static_cast<std::size_t>(i)]; k < i; ++k) x(k) -= l_(i, k) * xi;
    }
  }

 private:
  MatX l_;
  std::vector<Eigen::Index> first_;
};

}  // namespace detail

/// Projected Gauss-Seidel on the bounded rows only: rows with infinite bounds
/// on both sides are eliminated exactly through an envelope Cholesky
/// factorization, and PGS runs on the Schur complement of the remaining rows.
/// Solves the same system as solve_pgs. Falls back to solve_pgs if the
/// bilateral block is not positive-definite.
inline SolveResult solve_schur_pgs(std::span<const ConstraintRow> rows, std::span<const InverseMass> inv_mass,
                                   std::span<const Vec6> free_velocity, double h,
                                   const SolverSettings& settings = {}, std::span<const double> warm_start = {}) {
  const std::size_t n = rows.size();
  SolveResult out;
  out.lambdas.assign(n, 0.0);
  if (n == 0) return out;

  std::vector<std::size_t> bil, bnd;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isinf(rows[i].lambda_lo) && rows[i].lambda_lo < 0.0 && std::isinf(rows[i].lambda_hi) &&
        rows[i].lambda_hi > 0.0)
      bil.push_back(i);
    else
      bnd.push_back(i);
  }
  if (bil.empty()) return solve_pgs(rows, inv_mass, free_velocity, h, settings, warm_start);

  // Dense system matrix and rhs, assembled per body.
  std::vector<std::vector<std::size_t>> touching(inv_mass.size());
  std::vector<Vec6> ma(n), mb(n);
  VecX b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const ConstraintRow& r = rows[i];
    double jv = 0.0;
    if (r.body_a != kStatic) {
      const auto a = static_cast<std::size_t>(r.body_a);
      ma[i] = inv_mass[a].apply(r.jac_a);
      jv += r.jac_a.dot(free_velocity[a]);
      touching[a].push_back(i);
    }
    if (r.body_b != kStatic) {
      const auto bb = static_cast<std::size_t>(r.body_b);
      mb[i] = inv_mass[bb].apply(r.jac_b);
      jv += r.jac_b.dot(free_velocity[bb]);
      touching[bb].push_back(i);
    }
    b(static_cast<Eigen::Index>(i)) = (r.rhs - jv) / h;
  }
  MatX a = MatX::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t body = 0; body < touching.size(); ++body) {
    const auto& list = touching[body];
    for (std::size_t p = 0; p < list.size(); ++p) {
      const std::size_t i = list[p];
      const Vec6& ji = rows[i].body_a == static_cast<int>(body) ? rows[i].jac_a : rows[i].jac_b;
      for (std::size_t q = p; q < list.size(); ++q) {
        const std::size_t j = list[q];
        const Vec6& mj = rows[j].body_a == static_cast<int>(body) ? ma[j] : mb[j];
        const double v = ji.dot(mj);
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += v;
        if (i != j) a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) += v;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += rows[i].cfm / h;

  const auto nb = static_cast<Eigen::Index>(bil.size());
  const auto nf = static_cast<Eigen::Index>(bnd.size());
  MatX abb(nb, nb), abf(nb, nf), aff(nf, nf);
  VecX bb(nb), bf(nf);
  for (Eigen::Index i = 0; i < nb; ++i) {
    const auto ri = static_cast<Eigen::Index>(bil[static_cast<std::size_t>(i)]);
    bb(i) = b(ri);
    for (Eigen::Index j = 0; j < nb; ++j) abb(i, j) = a(ri, static_cast<Eigen::Index>(bil[static_cast<std::size_t>(j)]));
    for (Eigen::Index j = 0; j < nf; ++j) abf(i, j) = a(ri, static_cast<Eigen::Index>(bnd[static_cast<std::size_t>(j)]));
  }
  for (Eigen::Index i = 0; i < nf; ++i) {
    const auto ri = static_cast<Eigen::Index>(bnd[static_cast<std::size_t>(i)]);
    bf(i) = b(ri);
    for (Eigen::Index j = 0; j < nf; ++j) aff(i, j) = a(ri, static_cast<Eigen::Index>(bnd[static_cast<std::size_t>(j)]));
  }

  detail::EnvelopeCholesky chol;
  if (!chol.factor(abb)) return solve_pgs(rows, inv_mass, free_velocity, h, settings, warm_start);

  // S = A_ff - A_fb A_bb^-1 A_bf,  c = b_f - A_fb A_bb^-1 b_b
  MatX x = abf;
  for (Eigen::Index j = 0; j < nf; ++j) chol.solve(x.col(j));
  VecX y = bb;
  chol.solve(y);
  const MatX s = aff - abf.transpose() * x;
  const VecX c = bf - abf.transpose() * y;

  // Friction rows read their normal row's multiplier from out.lambdas, which mirrors lf during the sweeps.
  VecX lf = VecX::Zero(nf);
  if (!warm_start.empty()) {
    for (Eigen::Index i = 0; i < nf; ++i) {
      const std::size_t ri = bnd[static_cast<std::size_t>(i)];
      if (rows[ri].friction_of < 0) out.lambdas[ri] = lf(i) = std::clamp(warm_start[ri], rows[ri].lambda_lo, rows[ri].lambda_hi);
    }
    for (Eigen::Index i = 0; i < nf; ++i) {
      const std::size_t ri = bnd[static_cast<std::size_t>(i)];
      if (rows[ri].friction_of < 0) continue;
      const auto [lo, hi] = detail::row_bounds(rows[ri], out.lambdas);
      out.lambdas[ri] = lf(i) = std::clamp(warm_start[ri], lo, hi);
    }
  }

  out.converged = nf == 0;
  out.iterations = 0;
  out.residual = 0.0;
  if (nf > 0) {
    VecX sl = s * lf;
    for (int it = 0; it < settings.max_iterations; ++it) {
      double max_delta = 0.0;
      double max_lambda = 0.0;
      for (Eigen::Index i = 0; i < nf; ++i) {
        const ConstraintRow& r = rows[bnd[static_cast<std::size_t>(i)]];
        const double d = s(i, i);
        if (!(d > 0.0)) continue;
        const double old = lf(i);
        const auto [lo, hi] = detail::row_bounds(r, out.lambdas);
        const double next = std::clamp(old + (c(i) - sl(i)) / d, lo, hi);
        const double delta = next - old;
        if (delta != 0.0) {
          lf(i) = next;
          out.lambdas[bnd[static_cast<std::size_t>(i)]] = next;
          sl += s.col(i) * delta;
        }
        max_delta = std::max(max_delta, std::abs(delta));
        max_lambda = std::max(max_lambda, std::abs(next));
      }
      out.iterations = it + 1;
      out.residual = max_delta / std::max(max_lambda, 1e-9);
      if (!std::isfinite(out.residual)) break;
      if (out.residual <= settings.tolerance) {
        out.converged = true;
        break;
      }
    }
  }

  VecX lb = bb - abf * lf;
  chol.solve(lb);
  for (Eigen::Index i = 0; i < nb; ++i) out.lambdas[bil[static_cast<std::size_t>(i)]] = lb(i);
  for (Eigen::Index i = 0; i < nf; ++i) out.lambdas[bnd[static_cast<std::size_t>(i)]] = lf(i);
  return out;
}

/// Dispatches on settings.kind.
inline SolveResult solve(std::span<const ConstraintRow> rows, std::span<const InverseMass> inv_mass,
                         std::span<const Vec6> free_velocity, double h, const SolverSettings& settings = {},
                         std::span<const double> warm_start = {}) {
  return settings.kind == SolverKind::ProjectedGaussSeidel
             ? solve_pgs(rows, inv_mass, free_velocity, h, settings, warm_start)
             : solve_schur_pgs(rows, inv_mass, free_velocity, h, settings, warm_start);
}

/// Validating solve that throws NonConvergence when the tolerance is not reached.
inline std::vector<double> solve_constraints(std::span<const ConstraintRow> rows, std::span<const InverseMass> inv_mass,
                                             std::span<const Vec6> free_velocity, double h,
                                             const SolverSettings& settings = {}) {
  if (!(h > 0.0)) throw ConfigError("step size must be > 0");
  for (const auto& r : rows) validate(r);
  SolveResult res = settings.kind == SolverKind::ProjectedGaussSeidel
                        ? solve_pgs(rows, inv_mass, free_velocity, h, settings)
                        : solve_schur_pgs(rows, inv_mass, free_velocity, h, settings);
  if (!res.converged) throw NonConvergence(res.residual, res.iterations);
  return std::move(res.lambdas);
}

/// Applies J^T lambda to per-body generalized forces [f; tau].
inline void accumulate_constraint_forces(std::span<const ConstraintRow> rows, std::span<const double> lambdas,
                                         std::span<Vec6> forces) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ConstraintRow& r = rows[i];
    if (r.body_a != kStatic) forces[static_cast<std::size_t>(r.body_a)] += r.jac_a * lambdas[i];
    if (r.body_b != kStatic) forces[static_cast<std::size_t>(r.body_b)] += r.jac_b * lambdas[i];
  }
}

}  // namespace cobra::physics
