#include "teleop/recorder/video.hpp"

#include <atomic>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>
#include <unistd.h>

namespace teleop {

namespace fs = std::filesystem;

namespace {

cv::Mat to_bgr(const Image& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw VideoError("image buffer does not match its size");
  }
  cv::Mat rgb(image.height, image.width, CV_8UC3, const_cast<uint8_t*>(image.rgb.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

fs::path temp_video_path() {
  static std::atomic<uint64_t> counter{0};
  return fs::temp_directory_path() /
         fmt::format("teleop-video-{}-{}.mp4", ::getpid(), counter.fetch_add(1));
}

}  // namespace

std::string_view to_string(VideoMode m) { return m == VideoMode::mp4 ? "mp4" : "image_sequence"; }

VideoMode parse_video_mode(std::string_view s) {
  if (s == "mp4") return VideoMode::mp4;
  if (s == "image_sequence") return VideoMode::image_sequence;
  throw std::invalid_argument(fmt::format("unknown video mode '{}' (mp4 | image_sequence)", s));
}

Bytes encode_png(const Image& image) {
  std::vector<uint8_t> out;
  if (!cv::imencode(".png", to_bgr(image), out)) throw VideoError("PNG encoding failed");
  return out;
}

Image load_image(const fs::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw VideoError(fmt::format("cannot decode image {}", path.string()));
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  Image img;
  img.width = rgb.cols;
  img.height = rgb.rows;
  img.rgb.assign(rgb.data, rgb.data + rgb.total() * 3);
  return img;
}

EncodedFiles encode_video(const std::vector<std::shared_ptr<const Image>>& frames,
                          const VideoConfig& config, const fs::path& stem) {
  if (frames.empty()) throw VideoError("no frames to encode");
  const int w = frames.front()->width;
  const int h = frames.front()->height;
  for (const auto& f : frames) {
    if (!f || f->width != w || f->height != h) {
      throw VideoError("frame resolution changed within an episode");
    }
  }

  EncodedFiles files;
  if (config.mode == VideoMode::image_sequence) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      files.emplace_back(stem / fmt::format("frame_{:06d}.png", i), encode_png(*frames[i]));
    }
    return files;
  }

  if (config.codec.size() != 4) throw VideoError("codec must be a four-character code");
  const fs::path tmp = temp_video_path();
  {
    cv::VideoWriter writer(tmp.string(),
                           cv::VideoWriter::fourcc(config.codec[0], config.codec[1],
                                                   config.codec[2], config.codec[3]),
                           config.fps, cv::Size(w, h));
    if (!writer.isOpened()) {
      throw VideoError(fmt::format("no encoder for codec '{}'; use the image_sequence video mode",
                                   config.codec));
    }
    for (const auto& f : frames) writer.write(to_bgr(*f));
  }
  std::ifstream in(tmp, std::ios::binary);
  Bytes data(std::istreambuf_iterator<char>(in), {});
  in.close();
  std::error_code ec;
  fs::remove(tmp, ec);
  if (data.empty()) throw VideoError("encoder produced no output");
  fs::path file = stem;
  file += ".mp4";
  files.emplace_back(std::move(file), std::move(data));
  return files;
}

std::optional<std::size_t> count_video_frames(const fs::path& stem) {
  fs::path mp4 = stem;
  mp4 += ".mp4";
  std::error_code ec;
  if (fs::is_regular_file(mp4, ec)) {
    cv::VideoCapture cap(mp4.string());
    if (!cap.isOpened()) throw VideoError(fmt::format("cannot open video {}", mp4.string()));
    std::size_t n = 0;
    while (cap.grab()) ++n;
    return n;
  }
  if (fs::is_directory(stem, ec)) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(stem, ec)) {
      if (e.is_regular_file() && e.path().extension() == ".png") ++n;
    }
    return n;
  }
  return std::nullopt;
}

}  // namespace teleop
