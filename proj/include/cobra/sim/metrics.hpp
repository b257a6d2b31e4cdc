#pragma once

#include "cobra/errors.hpp"
#include "cobra/sim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace cobra::sim {

struct MetricReport {
  std::vector<double> euclidean_error_series;
  double final_error = 0.0;
  double mean_error = 0.0;
  double mean_corr = 0.0;
  double corr_min = 0.0;
  double corr_max = 0.0;
};

/// Planar head-position distance per sample.
inline MetricReport euclidean_error(const Trajectory& ref, const Trajectory& sim) {
  if (ref.size() != sim.size()) throw LengthMismatch("trajectories differ in length");
  if (std::abs(ref.dt - sim.dt) > 1e-9 * ref.dt) throw LengthMismatch("trajectories differ in sample period");
  MetricReport m;
  m.euclidean_error_series.reserve(ref.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double e = (ref.samples[i].head.head<2>() - sim.samples[i].head.head<2>()).norm();
    m.euclidean_error_series.push_back(e);
    sum += e;
  }
  if (!ref.empty()) {
    m.final_error = m.euclidean_error_series.back();
    m.mean_error = sum / static_cast<double>(ref.size());
  }
  return m;
}

/// Pearson correlation; returns nullopt when either series has zero variance.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n != b.size() || n == 0) throw LengthMismatch("correlation series differ in length");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  const double eps = 1e-24 * static_cast<double>(n);
  if (saa <= eps || sbb <= eps) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

struct CorrelationReport {
  std::vector<double> series;  // per window, averaged across joints
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t degenerate_windows = 0;  // joint-windows with zero variance (scored 0)
};

/// Sliding-window (stride 1) Pearson correlation of per-joint series, averaged across joints.
inline CorrelationReport sliding_window_correlation(const std::vector<std::vector<double>>& desired,
                                                    const std::vector<std::vector<double>>& actual,
                                                    std::size_t window) {
  if (window < 3) throw ConfigError("correlation window must be >= 3 samples");
  if (desired.size() != actual.size() || desired.empty()) throw LengthMismatch("joint counts differ");
  const std::size_t n = desired.front().size();
  for (std::size_t j = 0; j < desired.size(); ++j)
    if (desired[j].size() != n || actual[j].size() != n) throw LengthMismatch("joint series differ in length");
  if (n < window) throw LengthMismatch("series shorter than the correlation window");
  CorrelationReport r;
  r.min = std::numeric_limits<double>::infinity();
  r.max = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t k = 0; k + window <= n; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < desired.size(); ++j) {
      const auto c = pearson(std::span<const double>(desired[j]).subspan(k, window),
                             std::span<const double>(actual[j]).subspan(k, window));
      if (c) {
        acc += *c;
      } else {
        ++r.degenerate_windows;
      }
    }
    const double w = acc / static_cast<double>(desired.size());
    r.series.push_back(w);
    total += w;
    r.min = std::min(r.min, w);
    r.max = std::max(r.max, w);
  }
  r.mean = total / static_cast<double>(r.series.size());
  return r;
}

/// Window of one gait period in samples.
inline std::size_t period_window(double frequency_hz, double dt) {
  return std::max<std::size_t>(3, static_cast<std::size_t>(std::llround(1.0 / (frequency_hz * dt))));
}

/// One gait period, shortened to the series length for runs shorter than a period.
inline std::size_t period_window(double frequency_hz, double dt, std::size_t samples) {
  return std::max<std::size_t>(3, std::min(period_window(frequency_hz, dt), samples));
}

inline std::vector<std::vector<double>> joint_matrix(const Trajectory& tr, bool reference) {
  std::vector<std::vector<double>> m;
  for (std::size_t j = 0; j < kJointCount; ++j) m.push_back(tr.joint_series(j, reference));
  return m;
}

/// Correlation of one trajectory's joint angles against another's (or against its own references when
/// desired == actual).
inline CorrelationReport joint_correlation(const Trajectory& desired, const Trajectory& actual, std::size_t window,
                                           bool desired_from_reference = false) {
  return sliding_window_correlation(joint_matrix(desired, desired_from_reference), joint_matrix(actual, false), window);
}

inline MetricReport compare(const Trajectory& ref, const Trajectory& sim, std::size_t window) {
  MetricReport m = euclidean_error(ref, sim);
  const auto c = joint_correlation(ref, sim, window);
  m.mean_corr = c.mean;
  m.corr_min = c.min;
  m.corr_max = c.max;
  return m;
}

}  // namespace cobra::sim
