#pragma once

#include "cobra/errors.hpp"
#include "cobra/physics/math.hpp"
#include "cobra/robot/sim_params.hpp"

#include <array>
#include <cmath>

namespace cobra::tuning {

inline constexpr std::size_t kParamCount = SimParams::kSize;
using ParamVector = Eigen::Matrix<double, static_cast<int>(kParamCount), 1>;

/// Box bounds on SimParams; normalization is logarithmic since every parameter is positive.
struct ParamBounds {
  SimParams lo{0.05, 0.05, 0.005, 0.002, 500.0, 5.0, 2e-4, 2e-3, 0.25};
  SimParams hi{1.5, 2.0, 0.5, 0.2, 20000.0, 300.0, 2e-2, 0.2, 4.0};

  bool contains(const SimParams& p) const {
    for (std::size_t i = 0; i < kParamCount; ++i)
      if (!(p[i] >= lo[i] && p[i] <= hi[i])) return false;
    return true;
  }
};

inline void validate(const ParamBounds& b) {
  for (std::size_t i = 0; i < kParamCount; ++i)
    if (!(b.lo[i] > 0.0) || !(b.hi[i] > b.lo[i]))
      throw ConfigError("bounds for " + std::string(SimParams::kNames[i]) + " must satisfy 0 < lo < hi");
}

inline ParamVector normalize(const SimParams& p, const ParamBounds& b) {
  ParamVector x;
  for (std::size_t i = 0; i < kParamCount; ++i)
    x(static_cast<Eigen::Index>(i)) = std::log(p[i] / b.lo[i]) / std::log(b.hi[i] / b.lo[i]);
  return x;
}

inline SimParams denormalize(const ParamVector& x, const ParamBounds& b) {
  SimParams p;
  for (std::size_t i = 0; i < kParamCount; ++i)
    p[i] = b.lo[i] * std::exp(x(static_cast<Eigen::Index>(i)) * std::log(b.hi[i] / b.lo[i]));
  return p;
}

inline ParamVector clamp_unit(const ParamVector& x) { return x.cwiseMax(0.0).cwiseMin(1.0); }

inline SimParams clamp(const SimParams& p, const ParamBounds& b) {
  SimParams out = p;
  for (std::size_t i = 0; i < kParamCount; ++i) out[i] = std::clamp(p[i], b.lo[i], b.hi[i]);
  return out;
}

/// Perturbation used to build a mismatched initial guess from hidden parameters.
struct Mismatch {
  double friction = 3.0;  // scales mu_c, mu_s, mu_v
  double actuator = 2.0;  // scales k_t
};

inline SimParams apply_mismatch(const SimParams& p, const Mismatch& m) {
  SimParams out = p;
  out.mu_c *= m.friction;
  out.mu_s *= m.friction;
  out.mu_v *= m.friction;
  out.k_t *= m.actuator;
  return out;
}

}  // namespace cobra::tuning
