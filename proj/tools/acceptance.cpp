#include "cobra/io/commands.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>

using namespace cobra;

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict erp_cfm() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (double m : {0.5, 1.0, 3.0}) {
    const double h = 0.01, kp = 1000.0, kd = 10.0;
    const auto ec = physics::erp_cfm_from_spring({h, kp, kd});
    oracle::SpringDamper o{m, kp, kd, h};
    double x = 1.0, v = 0.0, ox = 1.0, ov = 0.0, err = 0.0, peak = 1.0;
    for (int k = 0; k < 1000; ++k) {
      physics::ConstraintRow r;
      r.body_b = 0;
      r.jac_b(0) = 1.0;
      r.rhs = -(ec.erp / h) * x;
      r.cfm = ec.cfm;
      const physics::InverseMass im{1.0 / m, Mat3::Identity()};
      Vec6 vf = Vec6::Zero();
      vf(0) = v;
      physics::SolverSettings s;
      s.tolerance = 1e-15;
      const auto res = physics::solve_pgs(std::span(&r, 1), std::span(&im, 1), std::span(&vf, 1), h, s);
      v += h * res.lambdas[0] / m;
      x += h * v;
      o.step(ox, ov);
      err = std::max(err, std::abs(x - ox));
      peak = std::max(peak, std::abs(ox));
    }
    worst = std::max(worst, err / peak);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-6 && t < 1.0, fmt("relative error %.3g (<= 1e-6), %.3f s (< 1 s)", worst, t)};
}

Verdict solver_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    auto sys = oracle::random_system(rng, 6, 1 + c % 12);
    physics::SolverSettings s;
    s.max_iterations = 20000;
    s.tolerance = 1e-15;
    const auto res = physics::solve_pgs(sys.rows, sys.inv, sys.v_free, sys.h, s);
    const auto d = oracle::dense_system(sys.rows, sys.inv, sys.v_free, sys.h);
    const VecX lam = Eigen::Map<const VecX>(res.lambdas.data(), static_cast<Eigen::Index>(res.lambdas.size()));
    worst = std::max(worst, (d.A * lam - d.b).norm() / d.b.norm());
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-8 && t < 5.0, fmt("100 cases, worst relative residual %.3g (<= 1e-8), %.2f s (< 5 s)", worst, t)};
}

Verdict friction() {
  physics::World w;
  w.ground_model = physics::GroundModel::PyramidNormal;
  physics::RigidBodyState b;
  b.mass = 2.0;
  const Vec3 half(0.1, 0.1, 0.1);
  b.inertia_body = physics::box_inertia(b.mass, half);
  b.position = Vec3(0, 0, 0.1);
  b.lin_vel = Vec3(3.0, 1.0, 0.0);
  w.add_body(b);
  physics::ContactBox cb;
  cb.body = 0;
  cb.half_extents = half;
  cb.mu = 0.5;
  w.add_box(cb);
  double excess = -1e9;
  for (int k = 0; k < 10000; ++k) {
    w.step(1e-3);
    for (const auto& c : w.last_contacts())
      excess = std::max({excess, std::abs(c.tangential_1) - cb.mu * std::abs(c.normal_force),
                         std::abs(c.tangential_2) - cb.mu * std::abs(c.normal_force)});
  }
  contact::GroundParams g;
  const double s0 = std::abs(contact::stribeck_coefficient(0.0, g) - g.mu_s);
  const double sinf = std::abs(contact::stribeck_coefficient(1e3, g) - g.mu_c);
  contact::StickSlipParams p;
  double odd = 0.0;
  for (int i = 1; i <= 1000; ++i)
    odd = std::max(odd, std::abs(contact::stick_slip_force(i * 1e-3, p) + contact::stick_slip_force(-i * 1e-3, p)));
  p.f_c = 0.0;
  p.f_v = 0.0;
  const double vp = oracle::argmax_scan([&](double v) { return contact::stick_slip_force(v, p); }, 0.0, 0.5, 500000);
  const double peak_err = std::abs(vp - p.v_stribeck() / std::sqrt(2.0)) / (p.v_stribeck() / std::sqrt(2.0));
  const bool ok = excess <= 1e-9 && s0 <= 1e-6 && sinf <= 1e-6 && odd <= 1e-12 && peak_err <= 1e-3;
  return {ok, fmt("pyramid excess %.2g (<= 1e-9), |s(0)-mu_s| %.2g, |s(inf)-mu_c| %.2g, odd %.2g, peak rel %.2g (<= 1e-3)",
                  excess, s0, sinf, odd, peak_err)};
}

struct TwinOutcome {
  Verdict c4, c5, c6;
};

TwinOutcome twin(const io::RunConfig& base, int budget) {
  const auto t0 = Clock::now();
  io::RunConfig c = base;
  const SimParams hidden = io::sample_hidden(c);
  const SimParams untuned = c.params;
  std::map<double, sim::Trajectory> refs;
  for (double f : {0.35, 0.5, 0.65}) refs[f] = io::simulate_gait(c, hidden, f, c.duration);
  const auto ref = tuning::make_reference(refs[0.5], io::gait_at(c.gait, 0.5), c.robot, c.episode);
  tuning::TuneSettings ts = c.tune;
  ts.method = tuning::TuneMethod::Ppo;
  ts.budget = budget;
  const auto res = tuning::tune(tuning::reference_objective(ref), untuned, c.bounds, ts);

  std::map<double, std::pair<double, double>> err;
  sim::Trajectory tuned_05, untuned_05;
  for (const auto& [f, r] : refs) {
    const auto a = io::simulate_gait(c, untuned, f, c.duration);
    const auto b = io::simulate_gait(c, res.best, f, c.duration);
    err[f] = {-tuning::reward_external(r, a), -tuning::reward_external(r, b)};
    if (f == 0.5) {
      untuned_05 = a;
      tuned_05 = b;
    }
  }
  const double t = seconds_since(t0);
  TwinOutcome o;
  const auto [u5, t5] = err[0.5];
  const double ratio = t5 > 0.0 ? u5 / t5 : std::numeric_limits<double>::infinity();
  o.c4 = {ratio >= 5.0 && budget <= 500,
          fmt("final head error untuned %.4f m, tuned %.4f m, reduction %.1fx (>= 5x), %d rollouts, %.1f min", u5, t5,
              ratio, static_cast<int>(res.episodes.size()), t / 60.0)};
  const auto [u3, t3] = err[0.35];
  const auto [u6, t6] = err[0.65];
  o.c5 = {t3 < u3 && t6 < u6, fmt("0.35 Hz untuned %.4f m tuned %.4f m; 0.65 Hz untuned %.4f m tuned %.4f m", u3, t3, u6, t6)};
  const auto w = sim::period_window(0.5, tuned_05.dt);
  const double ct = sim::joint_correlation(tuned_05, tuned_05, w, true).mean;
  const double cu = sim::joint_correlation(untuned_05, untuned_05, w, true).mean;
  o.c6 = {ct >= 0.9 && ct > cu, fmt("desired-vs-actual joint correlation tuned %.4f (>= 0.9), untuned %.4f", ct, cu)};
  return o;
}

Verdict ppo() {
  std::mt19937_64 rng(77);
  tuning::Mlp m({3, 2});
  m.init(rng);
  tuning::GaussianPolicy policy(m, 0.3);
  std::normal_distribution<double> n;
  std::vector<tuning::SurrogateSample> samples;
  for (int i = 0; i < 16; ++i) {
    tuning::SurrogateSample s;
    s.state = VecX(3);
    for (Eigen::Index k = 0; k < 3; ++k) s.state(k) = n(rng);
    s.action = policy.sample(s.state, rng);
    s.log_prob_old = policy.log_prob(s.state, s.action) + 0.1 * n(rng);
    s.advantage = n(rng);
    samples.push_back(s);
  }
  VecX grad;
  tuning::clipped_surrogate(policy, samples, 0.2, &grad);
  const VecX theta = policy.parameters();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    tuning::GaussianPolicy p = policy;
    VecX tp = theta, tm = theta;
    const double h = 1e-6;
    tp(i) += h;
    tm(i) -= h;
    p.set_parameters(tp);
    const double fp = tuning::clipped_surrogate(p, samples, 0.2);
    p.set_parameters(tm);
    const double fm = tuning::clipped_surrogate(p, samples, 0.2);
    const double fd = (fp - fm) / (2 * h);
    worst = std::max(worst, std::abs(grad(i) - fd) / std::max(1.0, std::abs(fd)));
  }
  const double c1 = tuning::clipped_objective(1.5, 1.0, 0.2), c2 = tuning::clipped_objective(0.5, -1.0, 0.2);
  const bool ok = theta.size() == 10 && worst <= 1e-4 && c1 == 1.2 && c2 == -0.8;
  return {ok, fmt("%d parameters, gradient error %.2g (<= 1e-4), clip cases %.17g and %.17g", static_cast<int>(theta.size()),
                  worst, c1, c2)};
}

Verdict pursuit() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  const double l = 0.5;
  double worst = 0.0;
  int checked = 0;
  for (int k = 0; k < 1000; ++k) {
    const double a = ang(rng);
    const Vec2 g(l * std::sin(a), l * std::cos(a));
    const auto c = locomanip::pursuit_curvature(g, l);
    if (c.straight) {
      worst = std::max(worst, std::abs(g.x()));
      ++checked;
      continue;
    }
    // the arc from the origin heading +y reaches g after turning through twice the angle to g
    const double s = std::abs(c.radius) * 2.0 * std::abs(a);
    worst = std::max(worst, (oracle::arc_point(c.gamma, s) - g).norm());
    ++checked;
  }
  const double g0 = locomanip::pursuit_curvature(Vec2(0.0, l), l).gamma;
  return {worst <= 1e-9 && g0 == 0.0 && checked == 1000,
          fmt("1000 points, worst arc miss %.2g m (<= 1e-9), gamma(x=0) = %g", worst, g0)};
}

Verdict locomanip_batch(const io::RunConfig& c, int episodes, int replans) {
  const auto t0 = Clock::now();
  const auto results = io::run_task_batch(c, episodes, c.seed);
  std::vector<locomanip::TaskState> states;
  for (const auto& r : results) states.push_back(r.state);
  const auto s = locomanip::summarize(states);

  // A few steps in, the box is moved a quarter turn around the goal, away from the head.
  const locomanip::BoxHook teleport = [](int step, const locomanip::TaskState& st) -> std::optional<Vec2> {
    if (step != 15) return std::nullopt;
    const Vec2 r = st.box - st.goal;
    const Vec2 a = st.goal + Vec2(-r.y(), r.x()), b = st.goal + Vec2(r.y(), -r.x());
    return (a - st.head).norm() > (b - st.head).norm() ? a : b;
  };
  const auto moved = io::run_task_batch(c, replans, c.seed + 10000, teleport);
  std::vector<locomanip::TaskState> ms;
  for (const auto& r : moved) ms.push_back(r.state);
  const auto m = locomanip::summarize(ms);
  const bool ok = s.success_rate >= 0.8 && s.mean_steps < 700.0 && m.success_rate >= 0.6;
  return {ok, fmt("success %d/%d = %.2f (>= 0.8), mean steps %.1f (< 700); replanning %d/%d = %.2f (>= 0.6); %.1f min",
                  s.successes, s.episodes, s.success_rate, s.mean_steps, m.successes, m.episodes, m.success_rate,
                  seconds_since(t0) / 60.0)};
}

Verdict kuramoto() {
  const double R = 1.0, a = 4.0, h = 1e-3;
  const auto p = gait::KuramotoParams::uniform(1, a, 0.0, R, 2.0 * kPi * 0.5, 0.0);
  auto s = gait::KuramotoState::rest(1);
  double worst = 0.0, peak = 0.0, settle = -1.0;
  for (int k = 1; k <= 10000; ++k) {
    gait::kuramoto_step(s, p, h);
    const double t = k * h;
    worst = std::max(worst, std::abs(s.r(0) - R * (1.0 - (1.0 + a * t / 2.0) * std::exp(-a * t / 2.0))));
    peak = std::max(peak, s.r(0));
    if (settle < 0.0 && std::abs(s.r(0) - R) <= 0.01 * R) settle = t;
  }
  auto [cp, cs] = sim::sidewinding_cpg(gait::SineGaitParams::sidewinding(0.5));
  cs.r.setZero();
  VecX lo = VecX::Constant(cp.R.size(), 1e9), hi = -lo;
  for (int k = 0; k < 20000; ++k) {
    const VecX x = gait::kuramoto_step(cs, cp, h);
    if (k >= 16000) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
  }
  const double amp_err = (0.5 * (hi - lo) - cp.R).cwiseAbs().maxCoeff();
  const bool ok = settle > 0.0 && peak <= R + 1e-6 && worst <= 1e-6 && amp_err <= 1e-3;
  return {ok, fmt("within 1%% at t = %.3f s, overshoot %.2g (<= 1e-6), closed-form error %.2g, output amplitude error %.2g "
                  "(<= 1e-3)",
                  settle, std::max(0.0, peak - R), worst, amp_err)};
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") out[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
  return out;
}

Verdict determinism(const io::RunConfig& base, const fs::path& scratch) {
  io::RunConfig c = base;
  c.duration = 2.0;
  c.episode.initial_jitter = 0.01;
  c.tune.budget = 16;
  c.episodes = 2;
  c.task.pursuit.max_steps = 5;
  std::size_t files = 0;
  bool same = true;
  std::string diff;
  auto check = [&](const std::string& name, const std::function<void(const io::RunConfig&)>& run) {
    std::map<std::string, std::string> first;
    for (int k = 0; k < 2; ++k) {
      io::RunConfig rc = c;
      rc.output_dir = (scratch / (name + std::to_string(k))).string();
      fs::remove_all(rc.output_dir);
      run(rc);
      auto files_k = csv_files(rc.output_dir);
      if (k == 0) {
        first = std::move(files_k);
      } else if (files_k != first) {
        same = false;
        diff += " " + name;
      }
    }
    files += first.size();
  };
  check("simulate", [](const io::RunConfig& rc) { io::cmd_simulate(rc); });
  check("twin", [](const io::RunConfig& rc) { io::cmd_make_twin(rc); });
  c.reference_dir = (scratch / "twin0" / "reference").string();
  check("tune", [](const io::RunConfig& rc) { io::cmd_tune(rc); });
  check("locomanip", [](const io::RunConfig& rc) { io::cmd_locomanip(rc); });
  io::RunConfig mc = c;
  mc.metrics_reference = (scratch / "twin0/reference" / io::gait_file_name(0.5)).string();
  mc.metrics_simulated = (scratch / "simulate0" / io::gait_file_name(0.5)).string();
  c = mc;
  check("metrics", [](const io::RunConfig& rc) { io::cmd_metrics(rc); });
  fs::remove_all(scratch);
  return {same && files > 0, fmt("%zu CSV files from 5 commands compared byte for byte%s%s", files,
                                 same ? "" : "; differing:", diff.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks; prints one PASS/FAIL line per criterion"};
  std::string config = COBRA_DEFAULT_CONFIG;
  std::vector<int> only;
  int budget = 500, episodes = 50, replans = 20;
  std::string scratch = (fs::temp_directory_path() / "cobra_acceptance").string();
  app.add_option("--config", config, "benchmark configuration");
  app.add_option("--only", only, "criteria to run (default: all)");
  app.add_option("--budget", budget, "tuning budget for the twin experiment");
  app.add_option("--episodes", episodes, "loco-manipulation episodes");
  app.add_option("--replans", replans, "teleport episodes");
  app.add_option("--scratch", scratch, "scratch directory for the determinism check");
  CLI11_PARSE(app, argc, argv);

  io::RunConfig c;
  try {
    c = io::load_config(config);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const std::set<int> want(only.begin(), only.end());
  auto enabled = [&](int k) { return want.empty() || want.count(k) > 0; };

  int failed = 0;
  auto report = [&](int k, const char* name, const Verdict& v) {
    std::printf("[%s] %2d %-28s %s\n", v.pass ? "PASS" : "FAIL", k, name, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  };
  auto guarded = [&](int k, const char* name, const std::function<Verdict()>& f) {
    if (!enabled(k)) return;
    try {
      report(k, name, f());
    } catch (const std::exception& e) {
      report(k, name, {false, std::string("error: ") + e.what()});
    }
  };

  guarded(1, "erp/cfm equivalence", erp_cfm);
  guarded(2, "constraint solver oracle", solver_oracle);
  guarded(3, "friction invariants", friction);
  if (enabled(4) || enabled(5) || enabled(6)) {
    try {
      const auto o = twin(c, budget);
      if (enabled(4)) report(4, "synthetic-twin tuning", o.c4);
      if (enabled(5)) report(5, "generalization", o.c5);
      if (enabled(6)) report(6, "joint correlation", o.c6);
    } catch (const std::exception& e) {
      for (int k : {4, 5, 6})
        if (enabled(k)) report(k, "twin experiment", {false, std::string("error: ") + e.what()});
    }
  }
  guarded(7, "ppo correctness", ppo);
  guarded(8, "pure-pursuit geometry", pursuit);
  guarded(9, "loco-manipulation batch", [&] { return locomanip_batch(c, episodes, replans); });
  guarded(10, "kuramoto properties", kuramoto);
  guarded(11, "determinism", [&] { return determinism(c, scratch); });
  std::printf("%s\n", failed == 0 ? "ALL PASS" : fmt("%d FAILED", failed).c_str());
  return failed == 0 ? 0 : 1;
}
