#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "teleop/recorder/storage.hpp"
#include "teleop/recorder/video.hpp"

namespace teleop::dataset {

inline constexpr int kFps = 20;
inline constexpr std::size_t kStateDim = 13;
inline constexpr std::size_t kActionDim = 7;
inline constexpr uint32_t kChunkSize = 1000;

// observation.state layout: joints, end-effector xyz + rpy, gripper.
extern const std::array<std::string_view, kStateDim> kStateNames;
// action layout: position delta, wrapped rpy delta, gripper target.
extern const std::array<std::string_view, kActionDim> kActionNames;
inline constexpr std::size_t kStateRpyOffset = 9;
inline constexpr std::size_t kActionRpyOffset = 3;

/// Relative to the dataset root.
std::filesystem::path parquet_path(uint32_t episode_index);
/// Relative to the dataset root, without extension.
std::filesystem::path video_stem(uint32_t episode_index, std::string_view camera);
std::string video_key(std::string_view camera);

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CameraFeature {
  std::string name;
  int width = 0;
  int height = 0;
  friend bool operator==(const CameraFeature&, const CameraFeature&) = default;
};

struct EpisodeRecord {
  uint32_t episode_index = 0;
  std::vector<std::string> tasks;
  uint32_t length = 0;
};

/// In-memory form of meta/info.json, meta/episodes.jsonl and
/// meta/tasks.jsonl.
struct DatasetMeta {
  int fps = kFps;
  VideoConfig video;
  std::vector<CameraFeature> cameras;
  std::vector<EpisodeRecord> episodes;
  std::vector<std::string> tasks;

  uint64_t total_frames() const;
  /// Index of the task, appending it if new.
  uint32_t task_index(const std::string& task);

  nlohmann::ordered_json info_json() const;
  std::string info_text() const;
  std::string episodes_text() const;
  std::string tasks_text() const;
};

/// nullopt when root has no meta/info.json. Throws DatasetError if the
/// metadata exists but is malformed.
std::optional<DatasetMeta> load_meta(const std::filesystem::path& root, const Storage& storage);

struct Violation {
  std::string file;  // relative to the root
  std::optional<uint64_t> row;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  uint32_t episodes = 0;
  uint64_t frames = 0;

  bool ok() const { return violations.empty(); }
};

/// Checks metadata, schema, shapes, fps, row/frame-count agreement,
/// indices, timestamp monotonicity and angle ranges. Problems, including
/// unreadable files, are reported rather than thrown.
ValidationReport validate_dataset(const std::filesystem::path& root);

std::string format_violation(const Violation& v);

}  // namespace teleop::dataset
