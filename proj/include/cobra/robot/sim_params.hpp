#pragma once

#include "cobra/contact/friction.hpp"
#include "cobra/robot/actuator.hpp"

#include <array>
#include <stdexcept>
#include <string_view>

namespace cobra {

/// The tunable physical parameters of a simulated robot: ground contact and
/// Stribeck terms plus the shared actuator model.
struct SimParams {
  double mu_c = 0.3;
  double mu_s = 0.45;
  double mu_v = 0.05;
  double v_s = 0.02;
  double k1 = 3000.0;
  double k2 = 30.0;
  double j_m = 2e-3;
  double b_m = 0.02;
  double k_t = 1.0;

  static constexpr std::size_t kSize = 9;
  static constexpr std::array<std::string_view, kSize> kNames{"mu_c", "mu_s", "mu_v", "v_s", "k1",
                                                              "k2",   "j_m",  "b_m",  "k_t"};

  double& operator[](std::size_t i) { return *field(*this, i); }
  double operator[](std::size_t i) const { return *field(const_cast<SimParams&>(*this), i); }

  contact::GroundParams ground() const { return {k1, k2, mu_c, mu_s, mu_v, v_s}; }

  robot::ActuatorParams actuator(double u_max) const { return {j_m, b_m, k_t, u_max}; }

  friend bool operator==(const SimParams&, const SimParams&) = default;

 private:
  static double* field(SimParams& p, std::size_t i) {
    switch (i) {
      case 0: return &p.mu_c;
      case 1: return &p.mu_s;
      case 2: return &p.mu_v;
      case 3: return &p.v_s;
      case 4: return &p.k1;
      case 5: return &p.k2;
      case 6: return &p.j_m;
      case 7: return &p.b_m;
      case 8: return &p.k_t;
      default: throw std::out_of_range("SimParams index");
    }
  }
};

}  // namespace cobra
