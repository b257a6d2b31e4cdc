#pragma once

#include "cobra/errors.hpp"
#include "cobra/gait/kuramoto.hpp"
#include "cobra/gait/sine_gait.hpp"
#include "cobra/robot/cobra.hpp"
#include "cobra/sim/trajectory.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace cobra::sim {

/// Joint reference generator, queried once per control tick with increasing t.
using ReferenceFn = std::function<JointVector(double t)>;

struct EpisodeSettings {
  double control_dt = 0.01;
  int substeps = 10;
  /// Standard deviation of a seeded perturbation of the initial joint angles (rad).
  double initial_jitter = 0.0;
};

inline void validate(const EpisodeSettings& s) {
  if (!(s.control_dt > 0.0)) throw ConfigError("control_dt must be > 0");
  if (s.substeps < 1) throw ConfigError("substeps must be >= 1");
  if (s.initial_jitter < 0.0) throw ConfigError("initial_jitter must be >= 0");
}

inline TrajectorySample sample(const robot::Cobra& c, double t, const JointVector& q_ref) {
  TrajectorySample s;
  s.t = t;
  s.head = c.head().position;
  s.head_orientation = c.head().orientation;
  s.mid = c.mid().position;
  s.tail = c.tail().position;
  s.q = c.joint_angles();
  s.q_ref = q_ref;
  return s;
}

/// Advances the robot by one control tick holding the reference; the servo law
/// is re-evaluated at every physics substep.
inline void control_tick(robot::Cobra& c, const JointVector& q_ref, const EpisodeSettings& s) {
  const double h = s.control_dt / s.substeps;
  for (int k = 0; k < s.substeps; ++k) {
    c.apply_commands(q_ref);
    c.world().step(h);
  }
}

inline Trajectory run_episode(robot::Cobra& c, const ReferenceFn& ref, double duration, std::uint64_t seed,
                              const EpisodeSettings& settings = {}) {
  validate(settings);
  if (!(duration > 0.0)) throw ConfigError("episode duration must be > 0");
  if (settings.initial_jitter > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, settings.initial_jitter);
    JointVector q;
    for (Eigen::Index j = 0; j < q.size(); ++j) q(j) = n(rng);
    c.impose_joint_angles(q);
  }
  const auto ticks = static_cast<std::size_t>(std::llround(duration / settings.control_dt));
  Trajectory tr;
  tr.dt = settings.control_dt;
  tr.samples.reserve(ticks + 1);
  JointVector q_ref = ref(0.0);
  tr.samples.push_back(sample(c, 0.0, q_ref));
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * settings.control_dt;
    try {
      control_tick(c, q_ref, settings);
    } catch (const Error& e) {
      throw EpisodeError(t, e.what());
    }
    const double t1 = static_cast<double>(k + 1) * settings.control_dt;
    q_ref = ref(t1);
    tr.samples.push_back(sample(c, t1, q_ref));
  }
  return tr;
}

inline ReferenceFn sine_gait_fn(const gait::SineGaitParams& p) {
  gait::validate(p);
  return [p](double t) { return gait::sine_reference(t, p); };
}

inline Trajectory run_episode(robot::Cobra& c, const gait::SineGaitParams& g, double duration, std::uint64_t seed,
                              const EpisodeSettings& settings = {}) {
  return run_episode(c, sine_gait_fn(g), duration, seed, settings);
}

/// Kuramoto network driving the 11 joints, integrated with RK4 at a fixed internal step.
class KuramotoGait {
 public:
  KuramotoGait(gait::KuramotoParams p, gait::KuramotoState s, double h = 1e-3) : p_(std::move(p)), s_(std::move(s)), h_(h) {
    gait::validate(p_);
    if (p_.n != kJointCount) throw ConfigError("joint CPG must have 11 channels");
    if (!(h_ > 0.0)) throw ConfigError("CPG step must be > 0");
  }

  /// Integrates up to time t and returns the joint references.
  JointVector operator()(double t) {
    while (t_ + 0.5 * h_ < t) {
      gait::kuramoto_step(s_, p_, h_);
      t_ += h_;
    }
    return gait::kuramoto_output(s_, p_);
  }

  const gait::KuramotoParams& params() const { return p_; }
  void set_params(const gait::KuramotoParams& p) {
    gait::validate(p);
    p_ = p;
  }
  const gait::KuramotoState& state() const { return s_; }
  double time() const { return t_; }

 private:
  gait::KuramotoParams p_;
  gait::KuramotoState s_;
  double h_;
  double t_ = 0.0;
};

/// Kuramoto network whose phase-locked pattern reproduces the sine sidewinding gait.
/// Starting on the locked limit cycle at full amplitude makes its output equal sine_reference.
inline std::pair<gait::KuramotoParams, gait::KuramotoState> sidewinding_cpg(const gait::SineGaitParams& g,
                                                                          double mu = 2.0, double a = 4.0) {
  const auto n = static_cast<Eigen::Index>(kJointCount);
  gait::KuramotoParams p = gait::KuramotoParams::uniform(kJointCount, a, mu, 0.0, g.omega, 0.0);
  p.R = gait::sine_amplitudes(g);
  for (Eigen::Index i = 0; i + 1 < n; ++i) p.theta(i) = -mu * (g.phase(i + 1) - g.phase(i));
  gait::KuramotoState s{g.phase, p.R, VecX::Zero(n)};
  return {p, s};
}

}  // namespace cobra::sim
