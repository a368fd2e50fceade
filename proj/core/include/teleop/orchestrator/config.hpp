#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "teleop/gateway.hpp"
#include "teleop/orchestrator/toml.hpp"
#include "teleop/planner.hpp"
#include "teleop/recorder/camera.hpp"
#include "teleop/recorder/recorder.hpp"
#include "teleop/robot/bridge.hpp"
#include "teleop/robot/sim_arm.hpp"

namespace teleop {

enum class ClockMode { virtual_time, wall };

/// Everything one namespace runs: planner, mock controller + bridge,
/// cameras and a recorder.
struct ArmProfile {
  std::string ns;  // normalized: "" or "/name"
  std::string controller_address = "127.0.0.1";
  uint16_t controller_port = 0;  // 0 picks an ephemeral port
  PlannerConfig planner;
  robot::SimArmConfig sim;
  robot::BridgeConfig bridge;
  std::vector<CameraConfig> cameras;
};

struct RecorderDefaults {
  std::filesystem::path output_root = "dataset";
  VideoConfig video;
  Nanos freshness_window = std::chrono::milliseconds(50);
  std::size_t memory_ceiling_mb = 1024;
  std::string task = "teleoperation";
  bool auto_export = true;
};

struct LaunchProfile {
  ClockMode clock = ClockMode::virtual_time;
  uint64_t seed = 0;
  Nanos tick = std::chrono::milliseconds(1);  // scheduler step
  GatewayConfig gateway;
  RecorderDefaults recorder;
  std::vector<ArmProfile> arms;

  /// Throws ConfigError naming the field, e.g. "arm[1].namespace".
  void validate() const;

  /// The output root for an arm: the shared root for the unnamed namespace,
  /// root/<name> otherwise.
  std::filesystem::path output_root(const ArmProfile& arm) const;
  RecorderConfig recorder_config(const ArmProfile& arm) const;
  const ArmProfile& arm(std::string_view ns) const;

  static LaunchProfile single_arm();
  static LaunchProfile bimanual();
};

/// Unknown keys and wrong types are errors; omitted keys keep defaults.
/// Throws ConfigError.
LaunchProfile parse_profile(std::string_view toml_text);
LaunchProfile load_profile(const std::filesystem::path& path);
/// TOML that parse_profile reads back to an equal profile.
std::string to_toml(const LaunchProfile& profile);

}  // namespace teleop
