#pragma once

#include "cobra/errors.hpp"
#include "cobra/gait/sine_gait.hpp"
#include "cobra/locomanip/task.hpp"
#include "cobra/sim/episode.hpp"
#include "cobra/tuning/tuner.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace cobra::io {

namespace pt = boost::property_tree;

struct TwinSettings {
  std::uint64_t hidden_seed = 7;
  double hidden_spread = 0.0;  // hidden = nominal * exp(U(-spread, spread)) per parameter
  tuning::Mismatch mismatch;
};

/// Everything one run needs; a config file fully determines it.
struct RunConfig {
  robot::CobraConfig robot;
  gait::SineGaitParams gait = gait::SineGaitParams::sidewinding(0.5);
  std::vector<double> frequencies{0.35, 0.5, 0.65};
  double duration = 10.0;
  sim::EpisodeSettings episode;
  SimParams params;
  tuning::ParamBounds bounds;
  TwinSettings twin;
  tuning::TuneSettings tune;
  std::string reference_dir;
  locomanip::TaskConfig task;
  int episodes = 50;
  std::uint64_t seed = 1;
  std::string metrics_reference;
  std::string metrics_simulated;
  std::string output_dir = "out";
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty element in list '" + key + "'");
    item = item.substr(b, e - b + 1);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' has a non-numeric element '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("'" + key + "' is empty");
  return out;
}

inline std::string format_list(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

/// Typed reads that remember which keys were consumed, so unknown keys can be rejected.
class Reader {
 public:
  explicit Reader(const pt::ptree& t) : t_(t) {}

  template <class T>
  void get(const std::string& key, T& value) {
    used_.insert(key);
    const auto node = t_.get_optional<std::string>(key);
    if (!node) return;
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        value = *node;
      } else if constexpr (std::is_same_v<T, bool>) {
        const std::string& s = *node;
        if (s == "true" || s == "1" || s == "yes") value = true;
        else if (s == "false" || s == "0" || s == "no") value = false;
        else throw std::invalid_argument(s);
      } else {
        std::size_t used = 0;
        const std::string& s = *node;
        if constexpr (std::is_floating_point_v<T>) value = static_cast<T>(std::stod(s, &used));
        else if constexpr (std::is_unsigned_v<T>) value = static_cast<T>(std::stoull(s, &used));
        else value = static_cast<T>(std::stoll(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
      }
    } catch (const std::exception&) {
      throw ConfigError("invalid value '" + *node + "' for '" + key + "'");
    }
  }

  void get_list(const std::string& key, std::vector<double>& value) {
    used_.insert(key);
    if (const auto node = t_.get_optional<std::string>(key)) value = parse_list(*node, key);
  }

  void reject_unknown() const {
    for (const auto& [section, body] : t_) {
      if (body.empty()) throw ConfigError("key '" + section + "' must live inside a [section]");
      for (const auto& kv : body) {
        const std::string key = section + "." + kv.first;
        if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
      }
    }
  }

 private:
  const pt::ptree& t_;
  std::set<std::string> used_;
};

inline void get_deg(Reader& r, const std::string& key, double& rad) {
  double deg = rad2deg(rad);
  r.get(key, deg);
  rad = deg2rad(deg);
}

inline void read_per_link(Reader& r, const std::string& key, std::vector<double>& v) {
  std::vector<double> l = v;
  r.get_list(key, l);
  if (l.size() == 1) l.assign(robot::kLinkCount, l.front());
  v = l;
}

inline void read_robot(Reader& r, robot::CobraConfig& c) {
  read_per_link(r, "robot.link_length", c.link_length);
  read_per_link(r, "robot.link_radius", c.link_radius);
  read_per_link(r, "robot.link_mass", c.link_mass);
  double limit_deg = rad2deg(c.joint_limit);
  r.get("robot.joint_limit_deg", limit_deg);
  c.joint_limit = deg2rad(limit_deg);
  r.get("robot.joint_erp", c.joint_erp);
  r.get("robot.joint_cfm", c.joint_cfm);
  r.get("robot.servo_kp", c.servo.kp);
  r.get("robot.servo_kd", c.servo.kd);
  r.get("robot.u_max", c.u_max);
  std::string axes;
  r.get("robot.axes", axes);
  if (!axes.empty()) {
    if (axes.size() != robot::kJointCount) throw ConfigError("robot.axes must list 11 joints as P/Y letters");
    for (std::size_t j = 0; j < axes.size(); ++j) {
      if (axes[j] == 'P') c.joint_axes[j] = robot::JointAxis::Pitch;
      else if (axes[j] == 'Y') c.joint_axes[j] = robot::JointAxis::Yaw;
      else throw ConfigError("robot.axes letters must be P or Y");
    }
  }
}

inline void read_params(Reader& r, const std::string& section, SimParams& p) {
  for (std::size_t i = 0; i < SimParams::kSize; ++i) r.get(section + "." + std::string(SimParams::kNames[i]), p[i]);
}

}  // namespace detail

/// Robot geometry file: a [robot] section only.
inline robot::CobraConfig load_robot_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("robot config '" + path + "' does not exist");
  pt::ptree t;
  try {
    pt::read_ini(path, t);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse robot config: ") + e.what());
  }
  robot::CobraConfig c;
  detail::Reader r(t);
  detail::read_robot(r, c);
  r.reject_unknown();
  robot::validate(c);
  return c;
}

inline RunConfig parse_config(const pt::ptree& t, const std::filesystem::path& base_dir = ".") {
  RunConfig c;
  detail::Reader r(t);

  std::string robot_file;
  r.get("robot.file", robot_file);
  if (!robot_file.empty()) {
    std::filesystem::path p(robot_file);
    if (p.is_relative()) p = base_dir / p;
    c.robot = load_robot_file(p.string());
  }
  detail::read_robot(r, c.robot);

  double f = c.gait.frequency();
  r.get("gait.frequency_hz", f);
  if (!(f > 0.0)) throw ConfigError("gait.frequency_hz must be > 0");
  c.gait.omega = 2.0 * kPi * f;
  r.get("gait.a_pitch_deg", c.gait.a_pitch_deg);
  r.get("gait.a_yaw_deg", c.gait.a_yaw_deg);
  std::vector<double> phase(c.gait.phase.data(), c.gait.phase.data() + c.gait.phase.size());
  r.get_list("gait.phase", phase);
  if (phase.size() != robot::kJointCount) throw ConfigError("gait.phase must list 11 values");
  for (std::size_t j = 0; j < phase.size(); ++j) c.gait.phase(static_cast<Eigen::Index>(j)) = phase[j];
  c.gait.axes = c.robot.joint_axes;
  r.get_list("gait.frequencies", c.frequencies);
  r.get("gait.duration", c.duration);

  r.get("episode.control_dt", c.episode.control_dt);
  r.get("episode.substeps", c.episode.substeps);
  r.get("episode.initial_jitter", c.episode.initial_jitter);

  detail::read_params(r, "params", c.params);
  for (std::size_t i = 0; i < SimParams::kSize; ++i) {
    const std::string key = "bounds." + std::string(SimParams::kNames[i]);
    std::vector<double> lh{c.bounds.lo[i], c.bounds.hi[i]};
    r.get_list(key, lh);
    if (lh.size() != 2) throw ConfigError("'" + key + "' must be 'lo,hi'");
    c.bounds.lo[i] = lh[0];
    c.bounds.hi[i] = lh[1];
  }

  r.get("twin.hidden_seed", c.twin.hidden_seed);
  r.get("twin.hidden_spread", c.twin.hidden_spread);
  r.get("twin.friction_mismatch", c.twin.mismatch.friction);
  r.get("twin.actuator_mismatch", c.twin.mismatch.actuator);

  std::string method = tuning::to_string(c.tune.method);
  r.get("tune.method", method);
  c.tune.method = tuning::parse_method(method);
  r.get("tune.budget", c.tune.budget);
  r.get("tune.seed", c.tune.seed);
  r.get("tune.horizon", c.tune.horizon);
  r.get("tune.batch", c.tune.batch);
  r.get("tune.delta_max", c.tune.delta_max);
  r.get("tune.init_std", c.tune.init_std);
  r.get("tune.hidden", c.tune.hidden);
  r.get("tune.clip_eps", c.tune.hyper.clip_eps);
  r.get("tune.gamma", c.tune.hyper.gamma);
  r.get("tune.learning_rate", c.tune.hyper.learning_rate);
  r.get("tune.value_learning_rate", c.tune.hyper.value_learning_rate);
  r.get("tune.epochs", c.tune.hyper.epochs);
  r.get("tune.cem_population", c.tune.cem_population);
  r.get("tune.cem_elite", c.tune.cem_elite);
  r.get("tune.reference_dir", c.reference_dir);

  auto& tk = c.task;
  r.get("task.lookahead", tk.pursuit.lookahead);
  r.get("task.step_length", tk.pursuit.step_length);
  r.get("task.waypoints", tk.pursuit.waypoints);
  r.get("task.width", tk.pursuit.width);
  r.get("task.head_box", tk.pursuit.head_box);
  r.get("task.box_goal", tk.pursuit.box_goal);
  r.get("task.max_steps", tk.pursuit.max_steps);
  r.get("task.box_size", tk.box_size);
  r.get("task.box_mass", tk.box_mass);
  r.get("task.box_mu", tk.box_mu);
  r.get("task.contact_mu", tk.contact_mu);
  r.get("task.box_distance_min", tk.layout.box_distance_min);
  r.get("task.box_distance_max", tk.layout.box_distance_max);
  r.get("task.goal_distance_min", tk.layout.goal_distance_min);
  r.get("task.goal_distance_max", tk.layout.goal_distance_max);
  r.get("task.standoff", tk.standoff);
  r.get("task.push_width", tk.push_width);
  r.get("task.detour", tk.detour);
  r.get("task.steer_gain", tk.drive.gain);
  r.get("task.steer_max_gradient", tk.drive.max_gradient);
  r.get("task.turn_offset", tk.drive.turn_offset);
  detail::get_deg(r, "task.steer_tolerance_deg", tk.drive.tolerance);
  detail::get_deg(r, "task.travel_offset_deg", tk.drive.travel_offset);
  detail::get_deg(r, "task.reverse_travel_offset_deg", tk.drive.reverse_travel_offset);
  detail::get_deg(r, "task.stall_angle_deg", tk.drive.stall_angle);
  r.get("task.stall_steps", tk.drive.stall_steps);
  r.get("task.record_every", tk.drive.record_every);
  r.get("task.episodes", c.episodes);

  r.get("run.seed", c.seed);
  r.get("run.output_dir", c.output_dir);
  r.get("metrics.reference", c.metrics_reference);
  r.get("metrics.simulated", c.metrics_simulated);
  r.reject_unknown();

  robot::validate(c.robot);
  gait::validate(c.gait);
  sim::validate(c.episode);
  tuning::validate(c.bounds);
  if (!c.bounds.contains(c.params)) throw ConfigError("[params] lie outside [bounds]");
  for (double fr : c.frequencies)
    if (!(fr > 0.0)) throw ConfigError("gait.frequencies must be > 0");
  if (!(c.duration > 0.0)) throw ConfigError("gait.duration must be > 0");
  if (c.twin.hidden_spread < 0.0) throw ConfigError("twin.hidden_spread must be >= 0");
  if (!(c.twin.mismatch.friction > 0.0) || !(c.twin.mismatch.actuator > 0.0))
    throw ConfigError("mismatch factors must be > 0");
  tuning::validate(c.tune);
  locomanip::validate(c.task);
  if (c.episodes < 1) throw ConfigError("task.episodes must be >= 1");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config '" + path + "' does not exist");
  pt::ptree t;
  try {
    pt::read_ini(path, t);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  return parse_config(t, std::filesystem::path(path).parent_path());
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream is(text);
  pt::ptree t;
  try {
    pt::read_ini(is, t);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  return parse_config(t);
}

/// Canonical text of a resolved config; its hash identifies the run.
inline std::string canonical(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  auto list = [](const std::vector<double>& v) { return detail::format_list(v); };
  os << "[robot]\n"
     << "link_length=" << list(c.robot.link_length) << "\nlink_radius=" << list(c.robot.link_radius)
     << "\nlink_mass=" << list(c.robot.link_mass) << "\njoint_limit_deg=" << rad2deg(c.robot.joint_limit)
     << "\njoint_erp=" << c.robot.joint_erp << "\njoint_cfm=" << c.robot.joint_cfm << "\nservo_kp=" << c.robot.servo.kp
     << "\nservo_kd=" << c.robot.servo.kd << "\nu_max=" << c.robot.u_max << "\naxes=";
  for (auto a : c.robot.joint_axes) os << (a == robot::JointAxis::Pitch ? 'P' : 'Y');
  os << "\n[gait]\nfrequency_hz=" << c.gait.frequency() << "\na_pitch_deg=" << c.gait.a_pitch_deg
     << "\na_yaw_deg=" << c.gait.a_yaw_deg << "\nphase="
     << list(std::vector<double>(c.gait.phase.data(), c.gait.phase.data() + c.gait.phase.size()))
     << "\nfrequencies=" << list(c.frequencies) << "\nduration=" << c.duration;
  os << "\n[episode]\ncontrol_dt=" << c.episode.control_dt << "\nsubsteps=" << c.episode.substeps
     << "\ninitial_jitter=" << c.episode.initial_jitter << "\n[params]\n";
  for (std::size_t i = 0; i < SimParams::kSize; ++i) os << SimParams::kNames[i] << "=" << c.params[i] << "\n";
  os << "[bounds]\n";
  for (std::size_t i = 0; i < SimParams::kSize; ++i)
    os << SimParams::kNames[i] << "=" << c.bounds.lo[i] << "," << c.bounds.hi[i] << "\n";
  os << "[twin]\nhidden_seed=" << c.twin.hidden_seed << "\nhidden_spread=" << c.twin.hidden_spread
     << "\nfriction_mismatch=" << c.twin.mismatch.friction << "\nactuator_mismatch=" << c.twin.mismatch.actuator;
  const auto& t = c.tune;
  os << "\n[tune]\nmethod=" << tuning::to_string(t.method) << "\nbudget=" << t.budget << "\nseed=" << t.seed
     << "\nhorizon=" << t.horizon << "\nbatch=" << t.batch << "\ndelta_max=" << t.delta_max
     << "\ninit_std=" << t.init_std << "\nhidden=" << t.hidden << "\nclip_eps=" << t.hyper.clip_eps
     << "\ngamma=" << t.hyper.gamma << "\nlearning_rate=" << t.hyper.learning_rate
     << "\nvalue_learning_rate=" << t.hyper.value_learning_rate << "\nepochs=" << t.hyper.epochs
     << "\ncem_population=" << t.cem_population << "\ncem_elite=" << t.cem_elite
     << "\nreference_dir=" << c.reference_dir;
  const auto& k = c.task;
  os << "\n[task]\nlookahead=" << k.pursuit.lookahead << "\nstep_length=" << k.pursuit.step_length
     << "\nwaypoints=" << k.pursuit.waypoints << "\nwidth=" << k.pursuit.width << "\nhead_box=" << k.pursuit.head_box
     << "\nbox_goal=" << k.pursuit.box_goal << "\nmax_steps=" << k.pursuit.max_steps << "\nbox_size=" << k.box_size
     << "\nbox_mass=" << k.box_mass << "\nbox_mu=" << k.box_mu << "\ncontact_mu=" << k.contact_mu
     << "\nbox_distance_min=" << k.layout.box_distance_min << "\nbox_distance_max=" << k.layout.box_distance_max
     << "\ngoal_distance_min=" << k.layout.goal_distance_min << "\ngoal_distance_max=" << k.layout.goal_distance_max
     << "\nstandoff=" << k.standoff << "\npush_width=" << k.push_width << "\ndetour=" << k.detour
     << "\nsteer_gain=" << k.drive.gain << "\nsteer_max_gradient=" << k.drive.max_gradient << "\nturn_offset=" << k.drive.turn_offset
     << "\nsteer_tolerance_deg=" << rad2deg(k.drive.tolerance) << "\ntravel_offset_deg=" << rad2deg(k.drive.travel_offset)
     << "\nreverse_travel_offset_deg=" << rad2deg(k.drive.reverse_travel_offset)
     << "\nstall_angle_deg=" << rad2deg(k.drive.stall_angle) << "\nstall_steps=" << k.drive.stall_steps
     << "\nrecord_every=" << k.drive.record_every << "\nepisodes=" << c.episodes;
  os << "\n[run]\nseed=" << c.seed << "\noutput_dir=" << c.output_dir;
  os << "\n[metrics]\nreference=" << c.metrics_reference << "\nsimulated=" << c.metrics_simulated << "\n";
  return os.str();
}

/// Key-value text of a parameter set, one "name=value" per line under [params].
inline std::string params_text(const SimParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "[params]\n";
  for (std::size_t i = 0; i < SimParams::kSize; ++i) os << SimParams::kNames[i] << "=" << p[i] << "\n";
  return os.str();
}

inline SimParams load_params(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("params file '" + path + "' does not exist");
  pt::ptree t;
  try {
    pt::read_ini(path, t);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse params file: ") + e.what());
  }
  SimParams p;
  detail::Reader r(t);
  detail::read_params(r, "params", p);
  r.reject_unknown();
  return p;
}

}  // namespace cobra::io
