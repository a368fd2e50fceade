#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "teleop/clock.hpp"
#include "teleop/pose_math.hpp"

namespace teleop {

/// Phone pose as received from a client. stamp_ms is the client's own
/// clock and is informational only.
struct PoseSample {
  double stamp_ms = 0.0;
  Vec3 position;
  Quat orientation;
  std::string frame_id;
};

enum class Button { volume_up, volume_down };

struct ButtonEvent {
  Button button = Button::volume_up;
  double stamp_ms = 0.0;
};

struct TargetPose {
  Vec3 position;
  Quat orientation;
  Nanos stamp{0};
};

struct GripperCommand {
  bool closed = false;
  Nanos stamp{0};
};

struct RobotState {
  Vec3 ee_position;
  Quat ee_orientation;
  std::array<double, 6> joints{};
  bool gripper_closed = false;
  Nanos stamp{0};
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;  // row-major, 3 bytes per pixel

  std::size_t bytes() const { return rgb.size(); }
};

struct CameraFrame {
  std::string source;
  std::shared_ptr<const Image> image;
  uint64_t index = 0;
};

enum class Health { ok, degraded };

struct HealthEvent {
  std::string component;
  Health status = Health::ok;
  std::string detail;
};

/// State echo so clients can show truthful clutch/gripper indicators.
struct PlannerStatus {
  bool clutch_engaged = true;
  bool gripper_closed = false;
  uint64_t targets_emitted = 0;
  uint64_t jumps_dropped = 0;
};

enum class RecorderAction { start, stop, discard };

struct RecorderCommand {
  RecorderAction action = RecorderAction::start;
  std::string task;
};

enum class RecorderPhase { idle, recording, failed };

struct RecorderStatus {
  RecorderPhase phase = RecorderPhase::idle;
  uint32_t frames = 0;
  uint64_t ticks_skipped = 0;
  uint32_t episodes_saved = 0;
  std::string detail;
};

/// Published by the gateway when a phone client attaches to or leaves a
/// namespace.
struct ConnectionEvent {
  bool connected = false;
  uint64_t connection_id = 0;
};

}  // namespace teleop
