#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "teleop/messages.hpp"
#include "teleop/recorder/storage.hpp"

namespace teleop {

enum class VideoMode {
  mp4,             // one MP4 per camera per episode
  image_sequence,  // lossless PNG frames in a directory, byte-deterministic
};

std::string_view to_string(VideoMode m);
/// Accepts "mp4" or "image_sequence"; throws std::invalid_argument.
VideoMode parse_video_mode(std::string_view s);

struct VideoConfig {
  VideoMode mode = VideoMode::mp4;
  std::string codec = "mp4v";  // four characters
  double fps = 20.0;
};

class VideoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Files making up one encoded video, paths relative to the caller's base.
using EncodedFiles = std::vector<std::pair<std::filesystem::path, Bytes>>;

/// `stem` is the relative path without extension
/// (".../observation.images.cam_front/episode_000000"). MP4 mode yields
/// stem.mp4; image-sequence mode yields stem/frame_NNNNNN.png. Frames must
/// share one resolution. Throws VideoError.
EncodedFiles encode_video(const std::vector<std::shared_ptr<const Image>>& frames,
                          const VideoConfig& config, const std::filesystem::path& stem);

/// Frames stored at `stem` in either mode, or nullopt if neither form
/// exists. Throws VideoError if the file exists but cannot be decoded.
std::optional<std::size_t> count_video_frames(const std::filesystem::path& stem);

/// Decodes a PNG/JPEG/etc. from disk into RGB. Throws VideoError.
Image load_image(const std::filesystem::path& path);
Bytes encode_png(const Image& image);

}  // namespace teleop
