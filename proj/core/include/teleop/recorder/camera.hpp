#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "teleop/bus.hpp"
#include "teleop/messages.hpp"
#include "teleop/planner.hpp"

namespace teleop {

enum class CameraProducer { synthetic, image_sequence };

struct CameraConfig {
  std::string name = "cam_front";
  int width = 160;
  int height = 120;
  double rate_hz = 30.0;
  CameraProducer producer = CameraProducer::synthetic;
  std::string view = "front";  // synthetic: "front" (y/z) or "top" (y/x)
  std::filesystem::path directory;  // image_sequence: frames in name order
  uint64_t seed = 0;

  /// Throws std::invalid_argument naming the field.
  void validate() const;
};

/// Deterministic picture of the arm: seeded background texture, workspace
/// outline, link from the base to the end effector, and an end-effector
/// disc colored by gripper state. Same inputs, same bytes.
Image render_synthetic(const CameraConfig& config, const WorkspaceBounds& bounds,
                       const std::optional<RobotState>& state);

/// Publishes CameraFrame on <ns>/phone2act/camera/<name> at rate_hz on the
/// bus clock. Synthetic cameras draw the latest robot_feedback; image
/// sequences cycle through the directory, resized to width x height.
class CameraSource {
 public:
  CameraSource(Bus& bus, std::string ns, CameraConfig config, WorkspaceBounds bounds = {});

  void step(Nanos now);

  /// A frozen camera stops publishing, which starves the recorder's gate.
  void set_frozen(bool frozen) { frozen_ = frozen; }
  bool frozen() const { return frozen_; }
  uint64_t frames_published() const { return published_; }
  const CameraConfig& config() const { return config_; }
  TopicName topic() const { return topic_; }

 private:
  Bus& bus_;
  CameraConfig config_;
  WorkspaceBounds bounds_;
  TopicName topic_;
  TopicName feedback_topic_;
  Nanos period_;
  std::optional<Nanos> next_;
  bool frozen_ = false;
  uint64_t published_ = 0;
  std::vector<std::shared_ptr<const Image>> sequence_;
};

}  // namespace teleop
