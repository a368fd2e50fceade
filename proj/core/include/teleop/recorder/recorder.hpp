#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "teleop/bus.hpp"
#include "teleop/recorder/episode.hpp"
#include "teleop/recorder/storage.hpp"

namespace teleop {

struct RecorderConfig {
  std::vector<std::string> cameras = {"cam_front", "cam_top"};
  double fps = 20.0;
  Nanos freshness_window = std::chrono::milliseconds(50);
  std::size_t memory_ceiling_bytes = std::size_t{1} << 30;
  std::string default_task = "teleoperation";
  /// Finalize into export_config.root as soon as an episode stops.
  bool auto_export = true;
  ExportConfig export_config;

  /// Throws std::invalid_argument naming the field.
  void validate() const;
};

/// One per namespace. Listens on recorder_control for start/stop/discard;
/// while recording it ticks at fps on the bus clock, gating on the cameras
/// and robot_feedback being fresh, and buffers frames in RAM. Nothing is
/// written until the episode stops.
class RecorderNode {
 public:
  RecorderNode(Bus& bus, std::string ns, RecorderConfig config, Storage& storage);

  void step(Nanos now);
  /// Same effect as the command arriving on the control topic.
  void command(const RecorderCommand& cmd, Nanos now);

  RecorderStatus status() const;
  /// Exports completed by this node, oldest first.
  std::vector<ManifestDelta> exports() const;
  std::string last_error() const;
  /// The episode most recently stopped without auto export, if any.
  std::unique_ptr<Episode> take_stopped_episode();

  const std::string& ns() const { return ns_; }
  const RecorderConfig& config() const { return config_; }

 private:
  void handle(const RecorderCommand& cmd, Nanos now);
  void tick(Nanos now);
  void publish_status();

  Bus& bus_;
  std::string ns_;
  RecorderConfig config_;
  Storage& storage_;
  Nanos period_;

  Subscription control_;
  std::vector<TopicName> gate_topics_;  // cameras then robot_feedback
  TopicName target_topic_;
  TopicName gripper_topic_;
  TopicName status_topic_;

  mutable std::mutex mu_;
  std::unique_ptr<Episode> episode_;
  std::unique_ptr<Episode> stopped_;
  Nanos started_{0};
  Nanos next_tick_{0};
  std::optional<TargetPose> prev_target_;
  RecorderStatus status_;
  std::vector<ManifestDelta> exports_;
  std::string last_error_;
};

}  // namespace teleop
