#pragma once

// Helpers shared by the unit and acceptance tests.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "teleop/orchestrator/config.hpp"

namespace teleop::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("teleop-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

/// Virtual-clock profile on ephemeral ports, writing under `root`.
inline LaunchProfile test_profile(bool bimanual, const std::filesystem::path& root,
                                  VideoMode mode = VideoMode::image_sequence, uint64_t seed = 42) {
  LaunchProfile p = bimanual ? LaunchProfile::bimanual() : LaunchProfile::single_arm();
  p.clock = ClockMode::virtual_time;
  p.gateway.port = 0;
  p.recorder.output_root = root;
  p.recorder.video.mode = mode;
  p.seed = seed;
  for (auto& a : p.arms) {
    a.controller_port = 0;
    for (auto& c : a.cameras) c.seed = seed;
  }
  return p;
}

inline std::vector<uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// Relative path -> contents for every regular file under root, skipping
/// hidden top-level directories (staging, recovery).
inline std::map<std::string, std::vector<uint8_t>> snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::vector<uint8_t>> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), root);
    if (rel.begin()->string().starts_with(".")) continue;
    out[rel.generic_string()] = read_bytes(e.path());
  }
  return out;
}

}  // namespace teleop::test
