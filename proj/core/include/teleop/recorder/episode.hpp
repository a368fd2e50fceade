#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "teleop/bus.hpp"
#include "teleop/messages.hpp"
#include "teleop/pose_math.hpp"
#include "teleop/recorder/dataset.hpp"
#include "teleop/recorder/parquet.hpp"
#include "teleop/recorder/storage.hpp"
#include "teleop/recorder/video.hpp"

namespace teleop {

struct ObservationVector {
  std::array<double, 6> joints{};
  Vec3 ee_position;
  Rpy ee_rpy;  // each in [-pi, pi)
  double gripper = 0.0;

  std::array<double, dataset::kStateDim> values() const;
};

struct ActionVector {
  Vec3 delta_position;
  Rpy delta_rpy;  // wrapped, each in [-pi, pi)
  double gripper_target = 0.0;

  std::array<double, dataset::kActionDim> values() const;
};

ObservationVector make_observation(const RobotState& state);

/// Position difference plus the per-component wrapped difference of the
/// two orientations' roll/pitch/yaw.
ActionVector build_action(const TargetPose& prev, const TargetPose& cur, bool gripper_closed);

/// Float32 image of an angle already in [-pi, pi), nudged one ulp inward
/// where plain rounding would land on or outside +-pi.
float angle_to_f32(double a);

/// Returns the envelopes when every source has published and none is older
/// than window at now; nullopt otherwise. Throws std::invalid_argument for
/// an empty source list.
std::optional<std::vector<Envelope>> sync_gate(const std::vector<std::optional<Envelope>>& latest,
                                               Nanos now, Nanos window);

struct EpisodeFrame {
  uint32_t episode_index = 0;  // assigned at finalize
  uint32_t frame_index = 0;
  double timestamp = 0.0;  // seconds since the episode started
  ObservationVector observation;
  ActionVector action;
  std::vector<std::shared_ptr<const Image>> images;  // one per source, in source order
  Rpy target_rpy;  // orientation the action was measured against; not exported
};

enum class EpisodeState { recording, stopped, finalized, failed };

class Episode {
 public:
  Episode(std::string task, std::vector<std::string> cameras);

  /// Throws std::logic_error unless recording.
  void append(EpisodeFrame frame);
  void stop();
  /// Drops all buffered frames and records why.
  void fail(std::string reason);
  void mark_finalized() { state_ = EpisodeState::finalized; }

  EpisodeState state() const { return state_; }
  const std::string& task() const { return task_; }
  const std::vector<std::string>& cameras() const { return cameras_; }
  const std::vector<EpisodeFrame>& frames() const { return frames_; }
  std::vector<EpisodeFrame>& frames() { return frames_; }
  const std::string& failure() const { return failure_; }
  /// Approximate RAM held by the buffered frames.
  std::size_t bytes() const { return bytes_; }
  static std::size_t frame_bytes(const EpisodeFrame& f);

 private:
  std::string task_;
  std::vector<std::string> cameras_;
  std::vector<EpisodeFrame> frames_;
  EpisodeState state_ = EpisodeState::recording;
  std::string failure_;
  std::size_t bytes_ = 0;
};

struct ExportConfig {
  std::filesystem::path root = "dataset";
  VideoConfig video;
  std::filesystem::path recovery_dir;  // empty: <root>/.recovery
};

struct ManifestDelta {
  uint32_t episode_index = 0;
  uint32_t length = 0;
  uint64_t index_start = 0;
  uint32_t task_index = 0;
  std::vector<std::filesystem::path> files;  // relative to the root
};

class FinalizeError : public std::runtime_error {
 public:
  FinalizeError(const std::string& what, std::optional<std::filesystem::path> spooled = {})
      : std::runtime_error(what), spooled_(std::move(spooled)) {}
  const std::optional<std::filesystem::path>& spooled() const { return spooled_; }

 private:
  std::optional<std::filesystem::path> spooled_;
};

/// Rows of one episode in the exported column layout.
parquet::Table episode_table(const std::vector<EpisodeFrame>& frames, uint32_t episode_index,
                             uint64_t index_start, uint32_t task_index);

/// Writes the Parquet file, one video per camera and the updated metadata
/// through a staging directory, then renames into place with the metadata
/// last. On a storage failure the dataset is left as it was and the episode
/// is written to the recovery spool instead. Throws FinalizeError.
ManifestDelta finalize_episode(Episode& episode, const ExportConfig& config, Storage& storage);

}  // namespace teleop
