#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/math.hpp"
#include "cobra/sim/trajectory.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace cobra::tuning {

/// Sine fit A sin(omega t + phi) of one joint.
struct CpgFit {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double residual_ratio = 0.0;  // residual power / signal power
};

struct FitSettings {
  double max_frequency_hz = 5.0;
  double max_residual_ratio = 0.5;
};

namespace detail {

struct LinearFit {
  double a = 0.0, b = 0.0, sse = 0.0;
};

/// Least squares of q on [sin(omega t), cos(omega t)].
inline LinearFit fit_at(std::span<const double> q, double dt, double omega) {
  double ss = 0.0, cc = 0.0, sc = 0.0, qs = 0.0, qc = 0.0, qq = 0.0;
  // Rotate (cos, sin) incrementally; re-seeded periodically to bound drift.
  const double cd = std::cos(omega * dt), sd = std::sin(omega * dt);
  double c = 1.0, s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i % 256 == 0) {
      c = std::cos(omega * dt * static_cast<double>(i));
      s = std::sin(omega * dt * static_cast<double>(i));
    }
    ss += s * s;
    cc += c * c;
    sc += s * c;
    qs += q[i] * s;
    qc += q[i] * c;
    qq += q[i] * q[i];
    const double c1 = c * cd - s * sd;
    s = s * cd + c * sd;
    c = c1;
  }
  LinearFit f;
  const double det = ss * cc - sc * sc;
  if (!(std::abs(det) > 1e-12 * (ss * cc + 1e-300))) {
    f.sse = qq;
    return f;
  }
  f.a = (qs * cc - qc * sc) / det;
  f.b = (qc * ss - qs * sc) / det;
  f.sse = std::max(0.0, qq - (f.a * qs + f.b * qc));
  return f;
}

}  // namespace detail

/// Least-squares sine fit; the frequency is located by a grid scan and refined by golden-section search.
inline CpgFit fit_cpg(std::span<const double> q, double dt, const FitSettings& settings = {}) {
  if (!(dt > 0.0)) throw ConfigError("fit dt must be > 0");
  if (q.size() < 8) throw FitFailure("series too short for a sine fit");
  double power = 0.0;
  for (double v : q) power += v * v;
  if (!(power > 1e-18 * static_cast<double>(q.size()))) throw FitFailure("zero signal");

  const double span = dt * static_cast<double>(q.size() - 1);
  const double w_lo = 2.0 * kPi / span;
  const double w_hi = std::min(2.0 * kPi * settings.max_frequency_hz, kPi / dt);
  const double step = kPi / (4.0 * span);
  double best_w = w_lo, best_sse = std::numeric_limits<double>::infinity();
  for (double w = w_lo; w <= w_hi; w += step) {
    const double sse = detail::fit_at(q, dt, w).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best_w = w;
    }
  }
  double a = std::max(w_lo * 0.5, best_w - step), b = best_w + step;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = detail::fit_at(q, dt, x1).sse, f2 = detail::fit_at(q, dt, x2).sse;
  for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = detail::fit_at(q, dt, x1).sse;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = detail::fit_at(q, dt, x2).sse;
    }
  }
  const double w = 0.5 * (a + b);
  const auto lf = detail::fit_at(q, dt, w);
  CpgFit out;
  out.omega = w;
  out.amplitude = std::hypot(lf.a, lf.b);
  out.phase = wrap_angle(std::atan2(lf.b, lf.a));
  out.residual_ratio = lf.sse / power;
  if (out.residual_ratio > settings.max_residual_ratio)
    throw FitFailure("sine fit residual is " + std::to_string(100.0 * out.residual_ratio) + "% of signal power");
  return out;
}

inline std::vector<CpgFit> fit_joints(const sim::Trajectory& tr, const FitSettings& settings = {}) {
  std::vector<CpgFit> fits;
  for (std::size_t j = 0; j < sim::kJointCount; ++j) fits.push_back(fit_cpg(tr.joint_series(j), tr.dt, settings));
  return fits;
}

/// Negative planar distance between the final head positions.
inline double reward_external(const sim::Trajectory& ref, const sim::Trajectory& sim) {
  if (ref.empty() || ref.size() != sim.size()) throw LengthMismatch("trajectories differ in length");
  return -(ref.back().head.head<2>() - sim.back().head.head<2>()).norm();
}

/// Negative squared CPG-variable mismatch summed over joints; phase differences are wrapped.
inline double reward_internal(const std::vector<CpgFit>& ref, const std::vector<CpgFit>& sim) {
  if (ref.size() != sim.size()) throw LengthMismatch("fit lists differ in length");
  double r = 0.0;
  for (std::size_t j = 0; j < ref.size(); ++j) {
    const double dphi = wrap_angle(ref[j].phase - sim[j].phase);
    const double dw = ref[j].omega - sim[j].omega;
    const double da = ref[j].amplitude - sim[j].amplitude;
    r -= dphi * dphi + dw * dw + da * da;
  }
  return r;
}

}  // namespace cobra::tuning
