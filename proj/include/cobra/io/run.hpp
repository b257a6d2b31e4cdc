#pragma once

#include "cobra/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cobra::io {

namespace fs = std::filesystem;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read '" + p.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Collects a command's outputs in a staging directory and moves them into the output directory
/// only on commit, so a failing command leaves no partial files. commit() also writes manifest.json.
class RunDir {
 public:
  RunDir(fs::path out, std::string command, std::string config_text, std::uint64_t seed)
      : out_(std::move(out)), command_(std::move(command)), config_(std::move(config_text)), seed_(seed) {
    stage_ = out_ / (".staging-" + command_);
    std::error_code ec;
    fs::remove_all(stage_, ec);
    fs::create_directories(stage_, ec);
    if (ec) throw Error("cannot create output directory '" + out_.string() + "': " + ec.message());
  }

  RunDir(const RunDir&) = delete;
  RunDir& operator=(const RunDir&) = delete;

  ~RunDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(stage_, ec);
      if (fs::is_empty(out_, ec)) fs::remove(out_, ec);
    }
  }

  /// Config text minus the output_dir line, so reruns into different directories hash alike.
  static std::string without_output_dir(const std::string& text) {
    std::istringstream in(text);
    std::string out, line;
    while (std::getline(in, line))
      if (!line.starts_with("output_dir=")) out += line + "\n";
    return out;
  }

  /// Staged path for a relative artifact name; parent directories are created.
  fs::path path(const std::string& rel) {
    const fs::path p = stage_ / rel;
    fs::create_directories(p.parent_path());
    if (std::find(artifacts_.begin(), artifacts_.end(), rel) == artifacts_.end()) artifacts_.push_back(rel);
    return p;
  }

  void write(const std::string& rel, const std::string& text) {
    std::ofstream f(path(rel), std::ios::binary);
    f << text;
    if (!f) throw Error("cannot write '" + rel + "'");
  }

  void set_extra(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  void commit() {
    nlohmann::json m;
    m["command"] = command_;
    m["config_hash"] = hex64(fnv1a64(without_output_dir(config_)));
    m["seed"] = seed_;
    std::sort(artifacts_.begin(), artifacts_.end());
    auto& list = m["artifacts"] = nlohmann::json::array();
    for (const auto& a : artifacts_) list.push_back({{"path", a}, {"fnv1a64", hex64(fnv1a64(read_file(stage_ / a)))}});
    for (auto& [k, v] : extra_.items()) m[k] = v;
    write("config.ini", config_);
    artifacts_.erase(std::find(artifacts_.begin(), artifacts_.end(), "config.ini"));
    {
      std::ofstream f(stage_ / "manifest.json", std::ios::binary);
      f << m.dump(2) << "\n";
    }
    for (const auto& rel : artifacts_) move_out(rel);
    move_out("config.ini");
    move_out("manifest.json");
    std::error_code ec;
    fs::remove_all(stage_, ec);
    committed_ = true;
  }

  const fs::path& out() const { return out_; }

 private:
  void move_out(const std::string& rel) {
    const fs::path dst = out_ / rel;
    fs::create_directories(dst.parent_path());
    std::error_code ec;
    fs::remove(dst, ec);
    fs::rename(stage_ / rel, dst, ec);
    if (ec) throw Error("cannot move '" + rel + "' into place: " + ec.message());
  }

  fs::path out_, stage_;
  std::string command_, config_;
  std::uint64_t seed_;
  std::vector<std::string> artifacts_;
  nlohmann::json extra_ = nlohmann::json::object();
  bool committed_ = false;
};

}  // namespace cobra::io
