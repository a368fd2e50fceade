#include "teleop/recorder/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "teleop/pose_math.hpp"
#include "teleop/recorder/parquet.hpp"

namespace teleop::dataset {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const std::array<std::string_view, kStateDim> kStateNames = {
    "joint_0", "joint_1", "joint_2", "joint_3", "joint_4", "joint_5", "ee_x",
    "ee_y",    "ee_z",    "ee_roll", "ee_pitch", "ee_yaw", "gripper"};

const std::array<std::string_view, kActionDim> kActionNames = {
    "delta_x", "delta_y", "delta_z", "delta_roll", "delta_pitch", "delta_yaw", "gripper_target"};

fs::path parquet_path(uint32_t episode_index) {
  return fs::path("data") / fmt::format("chunk-{:03d}", episode_index / kChunkSize) /
         fmt::format("episode_{:06d}.parquet", episode_index);
}

std::string video_key(std::string_view camera) { return fmt::format("observation.images.{}", camera); }

fs::path video_stem(uint32_t episode_index, std::string_view camera) {
  return fs::path("videos") / fmt::format("chunk-{:03d}", episode_index / kChunkSize) /
         video_key(camera) / fmt::format("episode_{:06d}", episode_index);
}

uint64_t DatasetMeta::total_frames() const {
  uint64_t n = 0;
  for (const auto& e : episodes) n += e.length;
  return n;
}

uint32_t DatasetMeta::task_index(const std::string& task) {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i] == task) return static_cast<uint32_t>(i);
  }
  tasks.push_back(task);
  return static_cast<uint32_t>(tasks.size() - 1);
}

ordered_json DatasetMeta::info_json() const {
  const auto n = static_cast<uint32_t>(episodes.size());
  const bool mp4 = video.mode == VideoMode::mp4;
  ordered_json features;
  features["observation.state"] = {{"dtype", "float32"},
                                   {"shape", {kStateDim}},
                                   {"names", std::vector<std::string>(kStateNames.begin(), kStateNames.end())}};
  features["action"] = {{"dtype", "float32"},
                        {"shape", {kActionDim}},
                        {"names", std::vector<std::string>(kActionNames.begin(), kActionNames.end())}};
  for (const CameraFeature& c : cameras) {
    features[video_key(c.name)] = {
        {"dtype", mp4 ? "video" : "image"},
        {"shape", {c.height, c.width, 3}},
        {"names", {"height", "width", "channels"}},
        {"info",
         {{"video.fps", fps},
          {"video.height", c.height},
          {"video.width", c.width},
          {"video.channels", 3},
          {"video.codec", mp4 ? video.codec : "png"},
          {"video.mode", to_string(video.mode)}}}};
  }
  features["timestamp"] = {{"dtype", "float64"}, {"shape", {1}}, {"names", nullptr}};
  features["frame_index"] = {{"dtype", "uint32"}, {"shape", {1}}, {"names", nullptr}};
  features["episode_index"] = {{"dtype", "uint32"}, {"shape", {1}}, {"names", nullptr}};
  features["index"] = {{"dtype", "uint64"}, {"shape", {1}}, {"names", nullptr}};
  features["task_index"] = {{"dtype", "uint32"}, {"shape", {1}}, {"names", nullptr}};

  ordered_json info;
  info["codebase_version"] = "v2.0";
  info["robot_type"] = "sim_arm";
  info["total_episodes"] = n;
  info["total_frames"] = total_frames();
  info["total_tasks"] = tasks.size();
  info["total_videos"] = static_cast<uint64_t>(n) * cameras.size();
  info["total_chunks"] = n == 0 ? 0 : (n - 1) / kChunkSize + 1;
  info["chunks_size"] = kChunkSize;
  info["fps"] = fps;
  info["splits"] = {{"train", fmt::format("0:{}", n)}};
  info["data_path"] = "data/chunk-{episode_chunk:03d}/episode_{episode_index:06d}.parquet";
  info["video_path"] = mp4 ? "videos/chunk-{episode_chunk:03d}/{video_key}/episode_{episode_index:06d}.mp4"
                           : "videos/chunk-{episode_chunk:03d}/{video_key}/episode_{episode_index:06d}/"
                             "frame_{frame_index:06d}.png";
  info["features"] = std::move(features);
  return info;
}

std::string DatasetMeta::info_text() const { return info_json().dump(2) + "\n"; }

std::string DatasetMeta::episodes_text() const {
  std::string out;
  for (const auto& e : episodes) {
    ordered_json j;
    j["episode_index"] = e.episode_index;
    j["tasks"] = e.tasks;
    j["length"] = e.length;
    out += j.dump() + "\n";
  }
  return out;
}

std::string DatasetMeta::tasks_text() const {
  std::string out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    ordered_json j;
    j["task_index"] = i;
    j["task"] = tasks[i];
    out += j.dump() + "\n";
  }
  return out;
}

namespace {

std::string to_text(const Bytes& b) { return std::string(b.begin(), b.end()); }

std::vector<json> parse_jsonl(const std::string& text, const std::string& file) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DatasetError(fmt::format("{} line {}: {}", file, n, e.what()));
    }
  }
  return out;
}

}  // namespace

std::optional<DatasetMeta> load_meta(const fs::path& root, const Storage& storage) {
  const auto info_bytes = storage.read_file(root / "meta" / "info.json");
  if (!info_bytes) return std::nullopt;
  DatasetMeta meta;
  try {
    const json info = json::parse(to_text(*info_bytes));
    meta.fps = info.at("fps").get<int>();
    bool have_mode = false;
    for (const auto& [key, f] : info.at("features").items()) {
      if (key.rfind("observation.images.", 0) != 0) continue;
      const auto& shape = f.at("shape");
      meta.cameras.push_back({key.substr(std::string_view("observation.images.").size()),
                              shape.at(1).get<int>(), shape.at(0).get<int>()});
      if (!have_mode) {
        meta.video.mode = parse_video_mode(f.at("info").at("video.mode").get<std::string>());
        if (meta.video.mode == VideoMode::mp4) meta.video.codec = f.at("info").at("video.codec").get<std::string>();
        have_mode = true;
      }
    }
    meta.video.fps = meta.fps;
    if (auto b = storage.read_file(root / "meta" / "episodes.jsonl")) {
      for (const json& j : parse_jsonl(to_text(*b), "episodes.jsonl")) {
        meta.episodes.push_back({j.at("episode_index").get<uint32_t>(),
                                 j.at("tasks").get<std::vector<std::string>>(),
                                 j.at("length").get<uint32_t>()});
      }
    }
    if (auto b = storage.read_file(root / "meta" / "tasks.jsonl")) {
      for (const json& j : parse_jsonl(to_text(*b), "tasks.jsonl")) {
        meta.tasks.push_back(j.at("task").get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw DatasetError(fmt::format("malformed dataset metadata in {}: {}", root.string(), e.what()));
  } catch (const std::invalid_argument& e) {
    throw DatasetError(fmt::format("malformed dataset metadata in {}: {}", root.string(), e.what()));
  }
  return meta;
}

std::string format_violation(const Violation& v) {
  if (v.row) return fmt::format("{} row {}: {}", v.file, *v.row, v.message);
  return fmt::format("{}: {}", v.file, v.message);
}

namespace {

constexpr std::size_t kMaxRowViolationsPerFile = 50;

class Validator {
 public:
  explicit Validator(fs::path root) : root_(std::move(root)) {}

  ValidationReport run() {
    FilesystemStorage fs_storage;
    json info;
    const auto info_bytes = fs_storage.read_file(root_ / "meta" / "info.json");
    if (!info_bytes) {
      add("meta/info.json", "missing or unreadable");
      return std::move(report_);
    }
    try {
      info = json::parse(to_text(*info_bytes));
    } catch (const json::exception& e) {
      add("meta/info.json", fmt::format("not valid JSON: {}", e.what()));
      return std::move(report_);
    }
    check_info(info);

    std::vector<EpisodeRecord> episodes;
    if (auto b = fs_storage.read_file(root_ / "meta" / "episodes.jsonl")) {
      std::istringstream in(to_text(*b));
      std::string line;
      uint64_t n = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
          const json j = json::parse(line);
          episodes.push_back({j.at("episode_index").get<uint32_t>(),
                              j.at("tasks").get<std::vector<std::string>>(), j.at("length").get<uint32_t>()});
          if (episodes.back().episode_index != n) {
            add_row("meta/episodes.jsonl", n, fmt::format("episode_index {} out of order", episodes.back().episode_index));
          }
          if (episodes.back().length == 0) add_row("meta/episodes.jsonl", n, "episode has length 0");
        } catch (const json::exception& e) {
          add_row("meta/episodes.jsonl", n, fmt::format("malformed entry: {}", e.what()));
        }
        ++n;
      }
    } else {
      add("meta/episodes.jsonl", "missing or unreadable");
    }

    std::size_t task_count = 0;
    if (auto b = fs_storage.read_file(root_ / "meta" / "tasks.jsonl")) {
      std::istringstream in(to_text(*b));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
          const json j = json::parse(line);
          if (j.at("task_index").get<std::size_t>() != task_count) {
            add_row("meta/tasks.jsonl", task_count, "task_index out of order");
          }
        } catch (const json::exception& e) {
          add_row("meta/tasks.jsonl", task_count, fmt::format("malformed entry: {}", e.what()));
        }
        ++task_count;
      }
    } else {
      add("meta/tasks.jsonl", "missing or unreadable");
    }

    uint64_t total = 0;
    for (const auto& e : episodes) total += e.length;
    if (info.value("total_episodes", uint64_t{0}) != episodes.size()) {
      add("meta/info.json", fmt::format("total_episodes {} but episodes.jsonl lists {}",
                                        info.value("total_episodes", uint64_t{0}), episodes.size()));
    }
    if (info.value("total_frames", uint64_t{0}) != total) {
      add("meta/info.json", fmt::format("total_frames {} but episode lengths sum to {}",
                                        info.value("total_frames", uint64_t{0}), total));
    }

    uint64_t index_start = 0;
    for (const auto& e : episodes) {
      check_episode(e, index_start, task_count);
      index_start += e.length;
    }
    report_.episodes = static_cast<uint32_t>(episodes.size());
    report_.frames = total;
    return std::move(report_);
  }

 private:
  void add(std::string file, std::string msg) { report_.violations.push_back({std::move(file), std::nullopt, std::move(msg)}); }
  void add_row(std::string file, uint64_t row, std::string msg) {
    report_.violations.push_back({std::move(file), row, std::move(msg)});
  }

  void check_shape(const json& features, const char* key, std::size_t dim) {
    const auto it = features.find(key);
    if (it == features.end()) {
      add("meta/info.json", fmt::format("feature {} missing", key));
      return;
    }
    if (it->value("dtype", "") != "float32") add("meta/info.json", fmt::format("feature {} dtype is not float32", key));
    if (!it->contains("shape") || (*it)["shape"] != json::array({dim})) {
      add("meta/info.json", fmt::format("feature {} shape must be [{}]", key, dim));
    }
  }

  void check_info(const json& info) {
    if (!info.contains("fps") || !info["fps"].is_number() || info["fps"].get<double>() != kFps) {
      add("meta/info.json", fmt::format("fps must be {}", kFps));
    }
    if (!info.contains("features") || !info["features"].is_object()) {
      add("meta/info.json", "features missing");
      return;
    }
    const json& f = info["features"];
    check_shape(f, "observation.state", kStateDim);
    check_shape(f, "action", kActionDim);
    for (const char* k : {"timestamp", "frame_index", "episode_index", "index", "task_index"}) {
      if (!f.contains(k)) add("meta/info.json", fmt::format("feature {} missing", k));
    }
    for (const auto& [key, v] : f.items()) {
      if (key.rfind("observation.images.", 0) == 0) cameras_.push_back(key.substr(19));
    }
  }

  void check_list(const std::string& file, const parquet::Column& c, std::size_t dim,
                  std::size_t rpy_offset, bool binary_last) {
    for (std::size_t r = 0; r < c.lists.size(); ++r) {
      const auto& row = c.lists[r];
      if (row.size() != dim) {
        row_violation(file, r, fmt::format("{} has {} values, expected {}", c.name, row.size(), dim));
        continue;
      }
      for (std::size_t k = 0; k < dim; ++k) {
        if (!std::isfinite(row[k])) {
          row_violation(file, r, fmt::format("{}[{}] is not finite", c.name, k));
        }
      }
      for (std::size_t k = rpy_offset; k < rpy_offset + 3; ++k) {
        const double a = row[k];
        if (!(a >= -kPi && a < kPi)) {
          row_violation(file, r, fmt::format("{}[{}] = {} outside [-pi, pi)", c.name, k, a));
        }
      }
      if (binary_last && row[dim - 1] != 0.0f && row[dim - 1] != 1.0f) {
        row_violation(file, r, fmt::format("{}[{}] = {} is not 0 or 1", c.name, dim - 1, row[dim - 1]));
      }
    }
  }

  void row_violation(const std::string& file, uint64_t row, std::string msg) {
    if (++row_violations_ <= kMaxRowViolationsPerFile) add_row(file, row, std::move(msg));
  }

  void check_episode(const EpisodeRecord& e, uint64_t index_start, std::size_t task_count) {
    const std::string file = parquet_path(e.episode_index).generic_string();
    row_violations_ = 0;
    FilesystemStorage fs_storage;
    const auto bytes = fs_storage.read_file(root_ / file);
    if (!bytes) {
      add(file, fmt::format("episode {}: parquet file missing or unreadable", e.episode_index));
    } else {
      try {
        check_table(file, e, parquet::read(*bytes), index_start, task_count);
      } catch (const parquet::ParquetError& err) {
        add(file, fmt::format("episode {}: unreadable parquet: {}", e.episode_index, err.what()));
      }
    }
    for (const std::string& cam : cameras_) {
      const fs::path stem = video_stem(e.episode_index, cam);
      try {
        const auto n = count_video_frames(root_ / stem);
        if (!n) {
          add(stem.generic_string(), fmt::format("episode {}: video for {} missing", e.episode_index, cam));
        } else if (*n != e.length) {
          add(stem.generic_string(), fmt::format("episode {}: video for {} has {} frames, metadata says {}",
                                                 e.episode_index, cam, *n, e.length));
        }
      } catch (const VideoError& err) {
        add(stem.generic_string(), fmt::format("episode {}: {}", e.episode_index, err.what()));
      }
    }
  }

  void check_table(const std::string& file, const EpisodeRecord& e, const parquet::Table& t,
                   uint64_t index_start, std::size_t task_count) {
    using parquet::ColumnKind;
    const std::pair<const char*, ColumnKind> schema[] = {
        {"observation.state", ColumnKind::float32_list}, {"action", ColumnKind::float32_list},
        {"timestamp", ColumnKind::float64},              {"frame_index", ColumnKind::uint32},
        {"episode_index", ColumnKind::uint32},           {"index", ColumnKind::uint64},
        {"task_index", ColumnKind::uint32}};
    bool schema_ok = true;
    for (const auto& [name, kind] : schema) {
      if (!t.has(name)) {
        add(file, fmt::format("episode {}: column {} missing", e.episode_index, name));
        schema_ok = false;
      } else if (t.column(name).kind != kind) {
        add(file, fmt::format("episode {}: column {} has the wrong type", e.episode_index, name));
        schema_ok = false;
      }
    }
    if (!schema_ok) return;
    if (t.rows() != e.length) {
      add(file, fmt::format("episode {}: parquet has {} rows but metadata says {}", e.episode_index,
                            t.rows(), e.length));
    }
    const auto& ts = t.column("timestamp").f64;
    const auto& fi = t.column("frame_index").ints;
    const auto& ei = t.column("episode_index").ints;
    const auto& ix = t.column("index").ints;
    const auto& ti = t.column("task_index").ints;
    for (std::size_t r = 0; r < t.rows(); ++r) {
      if (!std::isfinite(ts[r]) || ts[r] < 0.0) row_violation(file, r, "timestamp is not a finite non-negative number");
      if (r > 0 && !(ts[r] > ts[r - 1])) row_violation(file, r, "timestamp not strictly increasing");
      if (fi[r] != r) row_violation(file, r, fmt::format("frame_index {} expected {}", fi[r], r));
      if (ei[r] != e.episode_index) row_violation(file, r, fmt::format("episode_index {} expected {}", ei[r], e.episode_index));
      if (ix[r] != index_start + r) row_violation(file, r, fmt::format("index {} expected {}", ix[r], index_start + r));
      if (ti[r] >= task_count) row_violation(file, r, fmt::format("task_index {} has no task", ti[r]));
    }
    check_list(file, t.column("observation.state"), kStateDim, kStateRpyOffset, true);
    check_list(file, t.column("action"), kActionDim, kActionRpyOffset, true);
  }

  fs::path root_;
  ValidationReport report_;
  std::vector<std::string> cameras_;
  std::size_t row_violations_ = 0;
};

}  // namespace

ValidationReport validate_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    ValidationReport r;
    r.violations.push_back({root.string(), std::nullopt, "dataset root does not exist"});
    return r;
  }
  return Validator(root).run();
}

}  // namespace teleop::dataset
