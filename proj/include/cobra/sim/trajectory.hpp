#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/math.hpp"
#include "cobra/robot/cobra.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cobra::sim {

using robot::JointVector;
using robot::kJointCount;

struct TrajectorySample {
  double t = 0.0;
  Vec3 head = Vec3::Zero();
  Quat head_orientation = Quat::Identity();
  Vec3 mid = Vec3::Zero();
  Vec3 tail = Vec3::Zero();
  JointVector q = JointVector::Zero();
  JointVector q_ref = JointVector::Zero();
};

struct Trajectory {
  double dt = 0.01;
  std::vector<TrajectorySample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  const TrajectorySample& back() const { return samples.back(); }
  double duration() const { return empty() ? 0.0 : samples.back().t - samples.front().t; }

  /// Joint angle (or reference) series of one joint.
  std::vector<double> joint_series(std::size_t j, bool reference = false) const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(reference ? s.q_ref(static_cast<Eigen::Index>(j)) : s.q(static_cast<Eigen::Index>(j)));
    return out;
  }
};

/// Checks uniform, strictly increasing time stamps.
inline void validate(const Trajectory& tr, double rel_tol = 1e-6) {
  if (!(tr.dt > 0.0)) throw ConfigError("trajectory dt must be > 0");
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const double d = tr.samples[i].t - tr.samples[i - 1].t;
    if (!(d > 0.0)) throw ConfigError("trajectory time stamps must be strictly increasing");
    if (std::abs(d - tr.dt) > rel_tol * tr.dt + 1e-12) throw ConfigError("trajectory time stamps must be uniform");
  }
}

inline std::string csv_header() {
  std::string h = "t,hx,hy,hz,qw,qx,qy,qz,mx,my,mz,tx,ty,tz";
  for (std::size_t j = 1; j <= kJointCount; ++j) h += ",q" + std::to_string(j);
  for (std::size_t j = 1; j <= kJointCount; ++j) h += ",r" + std::to_string(j);
  return h;
}

inline constexpr std::size_t kCsvColumns = 14 + 2 * kJointCount;

namespace detail {

inline void append_number(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

inline double parse_number(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError("malformed number in trajectory CSV: '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const Trajectory& tr) {
  os << csv_header() << '\n';
  std::string line;
  for (const auto& s : tr.samples) {
    line.clear();
    std::array<double, kCsvColumns> v{};
    std::size_t k = 0;
    v[k++] = s.t;
    for (int i = 0; i < 3; ++i) v[k++] = s.head(i);
    v[k++] = s.head_orientation.w();
    v[k++] = s.head_orientation.x();
    v[k++] = s.head_orientation.y();
    v[k++] = s.head_orientation.z();
    for (int i = 0; i < 3; ++i) v[k++] = s.mid(i);
    for (int i = 0; i < 3; ++i) v[k++] = s.tail(i);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kJointCount); ++j) v[k++] = s.q(j);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kJointCount); ++j) v[k++] = s.q_ref(j);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) line.push_back(',');
      detail::append_number(line, v[i]);
    }
    line.push_back('\n');
    os << line;
  }
}

inline void write_csv(const std::string& path, const Trajectory& tr) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  write_csv(f, tr);
}

/// Reads a trajectory CSV; dt is taken from the first two time stamps.
inline Trajectory read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty trajectory CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw ConfigError("unexpected trajectory CSV header");
  Trajectory tr;
  std::array<double, kCsvColumns> v{};
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t k = 0, start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto end = comma == std::string::npos ? line.size() : comma;
      if (k >= kCsvColumns) throw ConfigError("too many columns in trajectory CSV row");
      v[k++] = detail::parse_number(std::string_view(line).substr(start, end - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (k != kCsvColumns) throw ConfigError("too few columns in trajectory CSV row");
    TrajectorySample s;
    k = 0;
    s.t = v[k++];
    for (int i = 0; i < 3; ++i) s.head(i) = v[k++];
    const double w = v[k++], x = v[k++], y = v[k++], z = v[k++];
    s.head_orientation = Quat(w, x, y, z);
    for (int i = 0; i < 3; ++i) s.mid(i) = v[k++];
    for (int i = 0; i < 3; ++i) s.tail(i) = v[k++];
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kJointCount); ++j) s.q(j) = v[k++];
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kJointCount); ++j) s.q_ref(j) = v[k++];
    tr.samples.push_back(s);
  }
  if (tr.samples.size() >= 2) tr.dt = tr.samples[1].t - tr.samples[0].t;
  validate(tr);
  return tr;
}

inline Trajectory read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open trajectory " + path);
  return read_csv(f);
}

}  // namespace cobra::sim
