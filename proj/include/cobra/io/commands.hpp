#pragma once

#include "cobra/io/config.hpp"
#include "cobra/io/run.hpp"
#include "cobra/locomanip/task.hpp"
#include "cobra/sim/metrics.hpp"
#include "cobra/tuning/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace cobra::io {

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<std::string> method;
  std::optional<int> budget;
};

inline void apply(RunConfig& c, const Overrides& o) {
  if (o.out) c.output_dir = *o.out;
  if (o.seed) {
    c.seed = *o.seed;
    c.tune.seed = *o.seed;
    c.twin.hidden_seed = *o.seed;
  }
  if (o.episodes) {
    if (*o.episodes < 1) throw ConfigError("--episodes must be >= 1");
    c.episodes = *o.episodes;
  }
  if (o.method) c.tune.method = tuning::parse_method(*o.method);
  if (o.budget) {
    if (*o.budget < 1) throw ConfigError("--budget must be >= 1");
    c.tune.budget = *o.budget;
  }
}

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_trajectory(const sim::Trajectory& tr) {
  std::ostringstream os;
  sim::write_csv(os, tr);
  return os.str();
}

}  // namespace detail

inline gait::SineGaitParams gait_at(const gait::SineGaitParams& g, double frequency_hz) {
  gait::SineGaitParams out = g;
  out.omega = 2.0 * kPi * frequency_hz;
  return out;
}

inline std::string gait_file_name(double frequency_hz) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "gait_%gHz.csv", frequency_hz);
  return buf;
}

inline constexpr const char* kSealedDir = "sealed";

/// Reference data may never come from the sealed directory of a twin dataset.
inline void reject_sealed(const fs::path& p) {
  for (const auto& part : fs::weakly_canonical(p))
    if (part == kSealedDir) throw ConfigError("'" + p.string() + "' lies in a sealed directory");
}

inline sim::Trajectory load_reference(const fs::path& dir, double frequency_hz) {
  reject_sealed(dir);
  const fs::path p = dir / gait_file_name(frequency_hz);
  if (!fs::exists(p)) throw ConfigError("reference trajectory '" + p.string() + "' does not exist");
  return sim::read_csv(p.string());
}

/// Hidden twin parameters: the nominal ones with the configured mismatch applied, then a seeded
/// log-uniform spread, clamped into the bounds.
inline SimParams sample_hidden(const RunConfig& c) {
  SimParams h = tuning::apply_mismatch(c.params, c.twin.mismatch);
  std::mt19937_64 rng(c.twin.hidden_seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < SimParams::kSize; ++i) {
    const double e = u(rng);
    h[i] *= std::exp(c.twin.hidden_spread * e);
  }
  return tuning::clamp(h, c.bounds);
}

inline sim::Trajectory simulate_gait(const RunConfig& c, const SimParams& p, double frequency_hz, double duration) {
  robot::Cobra robot(c.robot, p);
  return sim::run_episode(robot, gait_at(c.gait, frequency_hz), duration, c.seed, c.episode);
}

/// Per-frequency trajectories with the configured params plus a metrics summary.
inline void cmd_simulate(const RunConfig& c) {
  RunDir run(c.output_dir, "simulate", canonical(c), c.seed);
  std::string summary = "frequency_hz,rows,final_head_x,final_head_y,head_displacement,tracking_corr,tracking_rms\n";
  for (double f : c.frequencies) {
    const auto tr = simulate_gait(c, c.params, f, c.duration);
    run.write(gait_file_name(f), detail::csv_trajectory(tr));
    const auto corr = sim::joint_correlation(tr, tr, sim::period_window(f, tr.dt, tr.size()), true);
    double sq = 0.0;
    for (const auto& s : tr.samples) sq += (s.q - s.q_ref).squaredNorm();
    const double rms = std::sqrt(sq / (static_cast<double>(tr.size()) * robot::kJointCount));
    const Vec3 d = tr.back().head - tr.samples.front().head;
    summary += detail::num(f) + "," + std::to_string(tr.size()) + "," + detail::num(tr.back().head.x()) + "," +
               detail::num(tr.back().head.y()) + "," + detail::num(d.head<2>().norm()) + "," + detail::num(corr.mean) +
               "," + detail::num(rms) + "\n";
  }
  run.write("metrics.csv", summary);
  run.commit();
}

/// Reference trajectories from hidden parameters; the hidden values go to sealed/ for audit only.
inline void cmd_make_twin(const RunConfig& c) {
  RunDir run(c.output_dir, "make-twin", canonical(c), c.twin.hidden_seed);
  const SimParams hidden = sample_hidden(c);
  for (double f : c.frequencies)
    run.write(std::string("reference/") + gait_file_name(f), detail::csv_trajectory(simulate_gait(c, hidden, f, c.duration)));
  run.write(std::string(kSealedDir) + "/hidden_params.ini", params_text(hidden));
  run.commit();
}

struct GaitEvaluation {
  double frequency_hz = 0.0;
  sim::MetricReport untuned, tuned;
};

inline std::vector<GaitEvaluation> evaluate_gaits(const RunConfig& c, const fs::path& ref_dir, const SimParams& untuned,
                                                  const SimParams& tuned) {
  std::vector<GaitEvaluation> out;
  for (double f : c.frequencies) {
    const auto ref = load_reference(ref_dir, f);
    const auto w = sim::period_window(f, ref.dt, ref.size());
    const double dur = ref.duration();
    out.push_back({f, sim::compare(ref, simulate_gait(c, untuned, f, dur), w), sim::compare(ref, simulate_gait(c, tuned, f, dur), w)});
  }
  return out;
}

/// Tunes on the primary gait frequency only, then evaluates tuned and untuned params on every frequency.
inline tuning::TuneResult cmd_tune(const RunConfig& c) {
  if (c.reference_dir.empty()) throw ConfigError("tune.reference_dir is not set");
  const fs::path ref_dir = c.reference_dir;
  const double f0 = c.gait.frequency();
  auto ref = tuning::make_reference(load_reference(ref_dir, f0), c.gait, c.robot, c.episode);
  for (double f : c.frequencies) load_reference(ref_dir, f);  // fail early on a missing file

  RunDir run(c.output_dir, "tune", canonical(c), c.tune.seed);
  const auto res = tuning::tune(tuning::reference_objective(ref), c.params, c.bounds, c.tune);

  std::string curve = "episode,reward,r_internal,r_external,best_reward,ok\n";
  for (const auto& e : res.episodes)
    curve += std::to_string(e.index) + "," + detail::num(e.score.total()) + "," + detail::num(e.score.r_internal) + "," +
             detail::num(e.score.r_external) + "," + detail::num(e.best_total) + "," + (e.score.ok ? "1" : "0") + "\n";
  run.write("reward_curve.csv", curve);
  if (!res.updates.empty()) {
    std::string up = "update,surrogate_before,surrogate_after,value_loss,samples\n";
    for (std::size_t i = 0; i < res.updates.size(); ++i) {
      const auto& u = res.updates[i];
      up += std::to_string(i) + "," + detail::num(u.surrogate_before) + "," + detail::num(u.surrogate_after) + "," +
            detail::num(u.value_loss) + "," + std::to_string(u.samples) + "\n";
    }
    run.write("ppo_updates.csv", up);
  }
  run.write("best_params.ini", params_text(res.best));

  std::string ev =
      "frequency_hz,untuned_final_error,tuned_final_error,untuned_mean_error,tuned_mean_error,untuned_corr,tuned_corr\n";
  for (const auto& g : evaluate_gaits(c, ref_dir, c.params, res.best))
    ev += detail::num(g.frequency_hz) + "," + detail::num(g.untuned.final_error) + "," + detail::num(g.tuned.final_error) +
          "," + detail::num(g.untuned.mean_error) + "," + detail::num(g.tuned.mean_error) + "," +
          detail::num(g.untuned.mean_corr) + "," + detail::num(g.tuned.mean_corr) + "\n";
  run.write("evaluation.csv", ev);
  run.set_extra("method", tuning::to_string(c.tune.method));
  run.set_extra("budget", c.tune.budget);
  run.commit();
  return res;
}

inline std::string task_log_csv(const locomanip::TaskResult& r) {
  std::string s = "step,head_x,head_y,box_x,box_y,goal_x,goal_y,target,alpha,r1,r2,mode,outcome\n";
  for (const auto& l : r.log)
    s += std::to_string(l.step) + "," + detail::num(l.head.x()) + "," + detail::num(l.head.y()) + "," +
         detail::num(l.box.x()) + "," + detail::num(l.box.y()) + "," + detail::num(l.goal.x()) + "," +
         detail::num(l.goal.y()) + "," + std::to_string(static_cast<int>(l.target)) + "," + detail::num(l.alpha) + "," +
         detail::num(l.r1) + "," + detail::num(l.r2) + "," + locomanip::to_string(l.mode) + "," +
         locomanip::to_string(l.outcome) + "\n";
  return s;
}

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads; results keep index order.
template <class F>
auto parallel_map(int n, F fn) -> std::vector<decltype(fn(0))> {
  using R = decltype(fn(0));
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(n));
  const int workers = std::max(1, std::min(n, static_cast<int>(std::thread::hardware_concurrency())));
  std::atomic<int> next{0};
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&] {
      for (int i = next++; i < n; i = next++) slots[static_cast<std::size_t>(i)].emplace(fn(i));
    }));
  for (auto& j : jobs) j.get();
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline std::vector<locomanip::TaskResult> run_task_batch(const RunConfig& c, int episodes, std::uint64_t first_seed,
                                                         const locomanip::BoxHook& hook = {}) {
  return parallel_map(episodes, [&](int i) {
    return locomanip::run_task(c.task, c.robot, c.params, first_seed + static_cast<std::uint64_t>(i), hook, c.episode,
                               c.gait.frequency());
  });
}

inline locomanip::BatchSummary cmd_locomanip(const RunConfig& c) {
  RunDir run(c.output_dir, "locomanip", canonical(c), c.seed);
  const auto results = run_task_batch(c, c.episodes, c.seed);
  std::vector<locomanip::TaskState> states;
  std::string table = "episode,seed,outcome,steps,box_goal_distance\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    char name[48];
    std::snprintf(name, sizeof name, "episodes/episode_%04zu.csv", i);
    run.write(name, task_log_csv(r));
    states.push_back(r.state);
    table += std::to_string(i) + "," + std::to_string(c.seed + i) + "," + locomanip::to_string(r.state.outcome) + "," +
             std::to_string(r.state.step_count) + "," + detail::num((r.state.box - r.state.goal).norm()) + "\n";
  }
  const auto s = locomanip::summarize(states);
  run.write("episodes.csv", table);
  run.write("summary.csv", "metric,value\nepisodes," + std::to_string(s.episodes) + "\nsuccesses," +
                               std::to_string(s.successes) + "\naverage_success_rate," + detail::num(s.success_rate) +
                               "\naverage_number_of_steps," + detail::num(s.mean_steps) + "\n");
  run.commit();
  return s;
}

/// Head error and joint correlation between two trajectory files.
inline sim::MetricReport cmd_metrics(const RunConfig& c) {
  if (c.metrics_reference.empty() || c.metrics_simulated.empty())
    throw ConfigError("metrics.reference and metrics.simulated must be set");
  for (const auto& p : {c.metrics_reference, c.metrics_simulated})
    if (!fs::exists(p)) throw ConfigError("trajectory '" + p + "' does not exist");
  const auto ref = sim::read_csv(c.metrics_reference);
  const auto sim = sim::read_csv(c.metrics_simulated);
  RunDir run(c.output_dir, "metrics", canonical(c), c.seed);
  const auto m = sim::compare(ref, sim, sim::period_window(c.gait.frequency(), ref.dt, ref.size()));
  run.write("metrics.csv", "metric,value\nfinal_error," + detail::num(m.final_error) + "\nmean_error," +
                               detail::num(m.mean_error) + "\nmean_corr," + detail::num(m.mean_corr) + "\ncorr_min," +
                               detail::num(m.corr_min) + "\ncorr_max," + detail::num(m.corr_max) + "\n");
  std::string series = "t,error\n";
  for (std::size_t k = 0; k < m.euclidean_error_series.size(); ++k)
    series += detail::num(ref.samples[k].t) + "," + detail::num(m.euclidean_error_series[k]) + "\n";
  run.write("error_series.csv", series);
  run.commit();
  return m;
}

}  // namespace cobra::io
