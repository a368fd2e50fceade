#include "teleop/recorder/episode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace teleop {

namespace fs = std::filesystem;
using dataset::DatasetMeta;

std::array<double, dataset::kStateDim> ObservationVector::values() const {
  return {joints[0],     joints[1],      joints[2],    joints[3],     joints[4],
          joints[5],     ee_position.x,  ee_position.y, ee_position.z, ee_rpy.roll,
          ee_rpy.pitch,  ee_rpy.yaw,     gripper};
}

std::array<double, dataset::kActionDim> ActionVector::values() const {
  return {delta_position.x, delta_position.y, delta_position.z, delta_rpy.roll,
          delta_rpy.pitch,  delta_rpy.yaw,    gripper_target};
}

ObservationVector make_observation(const RobotState& s) {
  ObservationVector o;
  o.joints = s.joints;
  o.ee_position = s.ee_position;
  o.ee_rpy = quat_to_rpy(s.ee_orientation).rpy;
  o.gripper = s.gripper_closed ? 1.0 : 0.0;
  return o;
}

ActionVector build_action(const TargetPose& prev, const TargetPose& cur, bool gripper_closed) {
  const Rpy a = quat_to_rpy(prev.orientation).rpy;
  const Rpy b = quat_to_rpy(cur.orientation).rpy;
  ActionVector v;
  v.delta_position = cur.position - prev.position;
  v.delta_rpy = {wrap_angle(b.roll - a.roll), wrap_angle(b.pitch - a.pitch), wrap_angle(b.yaw - a.yaw)};
  v.gripper_target = gripper_closed ? 1.0 : 0.0;
  return v;
}

float angle_to_f32(double a) {
  float f = static_cast<float>(a);
  const float pi_f = static_cast<float>(kPi);  // rounds above pi
  if (static_cast<double>(f) >= kPi) f = std::nextafter(pi_f, 0.0f);
  if (static_cast<double>(f) < -kPi) f = std::nextafter(-pi_f, 0.0f);
  return f;
}

std::optional<std::vector<Envelope>> sync_gate(const std::vector<std::optional<Envelope>>& latest,
                                               Nanos now, Nanos window) {
  if (latest.empty()) throw std::invalid_argument("sync_gate needs at least one source");
  std::vector<Envelope> out;
  out.reserve(latest.size());
  for (const auto& e : latest) {
    if (!e || now - e->publish_time > window) return std::nullopt;
    out.push_back(*e);
  }
  return out;
}

Episode::Episode(std::string task, std::vector<std::string> cameras)
    : task_(std::move(task)), cameras_(std::move(cameras)) {}

std::size_t Episode::frame_bytes(const EpisodeFrame& f) {
  std::size_t n = sizeof(EpisodeFrame);
  for (const auto& img : f.images) n += img ? img->bytes() + sizeof(Image) : 0;
  return n;
}

void Episode::append(EpisodeFrame frame) {
  if (state_ != EpisodeState::recording) throw std::logic_error("episode is not recording");
  bytes_ += frame_bytes(frame);
  frames_.push_back(std::move(frame));
}

void Episode::stop() {
  if (state_ == EpisodeState::recording) state_ = EpisodeState::stopped;
}

void Episode::fail(std::string reason) {
  frames_.clear();
  frames_.shrink_to_fit();
  bytes_ = 0;
  failure_ = std::move(reason);
  state_ = EpisodeState::failed;
}

parquet::Table episode_table(const std::vector<EpisodeFrame>& frames, uint32_t episode_index,
                             uint64_t index_start, uint32_t task_index) {
  using parquet::Column;
  using parquet::ColumnKind;
  Column state{"observation.state", ColumnKind::float32_list, {}, {}, {}};
  Column action{"action", ColumnKind::float32_list, {}, {}, {}};
  Column ts{"timestamp", ColumnKind::float64, {}, {}, {}};
  Column fi{"frame_index", ColumnKind::uint32, {}, {}, {}};
  Column ei{"episode_index", ColumnKind::uint32, {}, {}, {}};
  Column ix{"index", ColumnKind::uint64, {}, {}, {}};
  Column ti{"task_index", ColumnKind::uint32, {}, {}, {}};

  auto to_f32 = [](const auto& values, std::size_t rpy_offset) {
    std::vector<float> out(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      out[k] = (k >= rpy_offset && k < rpy_offset + 3) ? angle_to_f32(values[k])
                                                       : static_cast<float>(values[k]);
    }
    return out;
  };
  for (std::size_t r = 0; r < frames.size(); ++r) {
    const EpisodeFrame& f = frames[r];
    state.lists.push_back(to_f32(f.observation.values(), dataset::kStateRpyOffset));
    action.lists.push_back(to_f32(f.action.values(), dataset::kActionRpyOffset));
    ts.f64.push_back(f.timestamp);
    fi.ints.push_back(f.frame_index);
    ei.ints.push_back(episode_index);
    ix.ints.push_back(index_start + r);
    ti.ints.push_back(task_index);
  }
  parquet::Table t;
  t.columns = {std::move(state), std::move(action), std::move(ts), std::move(fi),
               std::move(ei),    std::move(ix),     std::move(ti)};
  return t;
}

namespace {

Bytes text_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

// Spool paths are picked so that an earlier spool is never overwritten.
fs::path unique_spool_dir(const fs::path& base, uint32_t episode_index, Storage& storage) {
  fs::path dir = base / fmt::format("episode_{:06d}", episode_index);
  for (int k = 1; storage.exists(dir); ++k) {
    dir = base / fmt::format("episode_{:06d}_{}", episode_index, k);
  }
  return dir;
}

}  // namespace

ManifestDelta finalize_episode(Episode& episode, const ExportConfig& config, Storage& storage) {
  if (episode.state() == EpisodeState::finalized) throw FinalizeError("already finalized");
  if (episode.state() == EpisodeState::failed) {
    throw FinalizeError(fmt::format("episode failed: {}", episode.failure()));
  }
  episode.stop();
  auto& frames = episode.frames();
  if (frames.empty()) throw FinalizeError("empty episode");

  const fs::path& root = config.root;
  DatasetMeta meta;
  try {
    if (auto existing = dataset::load_meta(root, storage)) {
      meta = std::move(*existing);
    } else {
      meta.video = config.video;
      meta.video.fps = dataset::kFps;
    }
  } catch (const dataset::DatasetError& e) {
    throw FinalizeError(e.what());
  }

  std::vector<dataset::CameraFeature> cameras;
  for (std::size_t c = 0; c < episode.cameras().size(); ++c) {
    const auto& img = frames.front().images.at(c);
    cameras.push_back({episode.cameras()[c], img->width, img->height});
  }
  if (meta.episodes.empty()) {
    meta.cameras = cameras;
    meta.video = config.video;
    meta.video.fps = dataset::kFps;
  } else if (meta.cameras != cameras || meta.video.mode != config.video.mode) {
    throw FinalizeError(fmt::format(
        "dataset at {} was recorded with different cameras, resolution or video mode", root.string()));
  }

  const DatasetMeta before = meta;
  ManifestDelta delta;
  delta.episode_index = static_cast<uint32_t>(meta.episodes.size());
  delta.length = static_cast<uint32_t>(frames.size());
  delta.index_start = meta.total_frames();
  delta.task_index = meta.task_index(episode.task());
  meta.episodes.push_back({delta.episode_index, {episode.task()}, delta.length});
  for (auto& f : frames) f.episode_index = delta.episode_index;

  // Everything is produced in memory first.
  EncodedFiles data_files;
  data_files.emplace_back(dataset::parquet_path(delta.episode_index),
                          parquet::write(episode_table(frames, delta.episode_index, delta.index_start,
                                                       delta.task_index)));
  struct VideoOut {
    fs::path stem;
    EncodedFiles files;
  };
  std::vector<VideoOut> videos;
  try {
    for (std::size_t c = 0; c < episode.cameras().size(); ++c) {
      std::vector<std::shared_ptr<const Image>> images;
      images.reserve(frames.size());
      for (const auto& f : frames) images.push_back(f.images.at(c));
      const fs::path stem = dataset::video_stem(delta.episode_index, episode.cameras()[c]);
      videos.push_back({stem, encode_video(images, meta.video, stem)});
    }
  } catch (const VideoError& e) {
    throw FinalizeError(fmt::format("video encoding failed: {}", e.what()));
  }
  const std::vector<std::pair<fs::path, std::string>> meta_files = {
      {fs::path("meta") / "tasks.jsonl", meta.tasks_text()},
      {fs::path("meta") / "episodes.jsonl", meta.episodes_text()},
      {fs::path("meta") / "info.json", meta.info_text()},
  };

  const fs::path staging = root / ".staging" / fmt::format("episode_{:06d}", delta.episode_index);
  std::vector<fs::path> committed;       // payload targets, for rollback
  std::vector<fs::path> meta_committed;  // meta files already replaced
  try {
    storage.remove_all(staging);
    for (const auto& [rel, bytes] : data_files) storage.write_file(staging / rel, bytes);
    for (const auto& v : videos) {
      for (const auto& [rel, bytes] : v.files) storage.write_file(staging / rel, bytes);
    }
    for (const auto& [rel, text] : meta_files) storage.write_file(staging / rel, text_bytes(text));

    for (const auto& [rel, bytes] : data_files) {
      storage.rename(staging / rel, root / rel);
      committed.push_back(root / rel);
      delta.files.push_back(rel);
    }
    for (const auto& v : videos) {
      // An image sequence moves as one directory.
      const fs::path rel = meta.video.mode == VideoMode::mp4 ? v.files.front().first : v.stem;
      storage.rename(staging / rel, root / rel);
      committed.push_back(root / rel);
      delta.files.push_back(rel);
    }
    // Metadata last: readers see the episode only once its payload is in place.
    for (const auto& [rel, text] : meta_files) {
      storage.rename(staging / rel, root / rel);
      meta_committed.push_back(rel);
      delta.files.push_back(rel);
    }
    try {
      storage.remove_all(staging);
    } catch (const StorageError& e) {
      spdlog::warn("recorder: could not remove staging directory: {}", e.what());
    }
  } catch (const StorageError& e) {
    // Undo whatever reached the dataset, restoring the previous manifest.
    for (const fs::path& p : committed) {
      try {
        storage.remove_all(p);
      } catch (const StorageError&) {
      }
    }
    const std::vector<std::pair<fs::path, std::string>> old_meta = {
        {fs::path("meta") / "tasks.jsonl", before.tasks_text()},
        {fs::path("meta") / "episodes.jsonl", before.episodes_text()},
        {fs::path("meta") / "info.json", before.info_text()}};
    for (const auto& [rel, text] : old_meta) {
      if (std::find(meta_committed.begin(), meta_committed.end(), rel) == meta_committed.end()) continue;
      try {
        if (before.episodes.empty()) {
          storage.remove_all(root / rel);
        } else {
          storage.write_file(root / rel, text_bytes(text));
        }
      } catch (const StorageError&) {
      }
    }
    try {
      storage.remove_all(staging);
    } catch (const StorageError&) {
    }

    const fs::path spool_base = config.recovery_dir.empty() ? root / ".recovery" : config.recovery_dir;
    try {
      const fs::path spool = unique_spool_dir(spool_base, delta.episode_index, storage);
      for (const auto& [rel, bytes] : data_files) storage.write_file(spool / rel, bytes);
      for (const auto& v : videos) {
        for (const auto& [rel, bytes] : v.files) storage.write_file(spool / rel, bytes);
      }
      storage.write_file(spool / "meta" / "info.json", text_bytes(meta.info_text()));
      storage.write_file(spool / "meta" / "episodes.jsonl",
                         text_bytes(DatasetMeta{meta.fps, meta.video, meta.cameras,
                                                {meta.episodes.back()}, meta.tasks}
                                        .episodes_text()));
      storage.write_file(spool / "meta" / "tasks.jsonl", text_bytes(meta.tasks_text()));
      episode.fail(fmt::format("disk failure during export ({}); spooled to {}", e.what(), spool.string()));
      throw FinalizeError(fmt::format("disk failure while exporting episode {}: {}; episode preserved in {}",
                                      delta.episode_index, e.what(), spool.string()),
                          spool);
    } catch (const StorageError& spool_error) {
      throw FinalizeError(fmt::format("disk failure while exporting episode {}: {}; recovery spool also failed: {}",
                                      delta.episode_index, e.what(), spool_error.what()));
    }
  }

  episode.mark_finalized();
  return delta;
}

}  // namespace teleop
