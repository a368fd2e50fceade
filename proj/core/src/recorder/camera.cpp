#include "teleop/recorder/camera.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>
#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "teleop/recorder/video.hpp"
#include "teleop/topics.hpp"

namespace teleop {

namespace fs = std::filesystem;

namespace {

uint64_t splitmix64(uint64_t& x) {
  uint64_t z = (x += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Projects a world point onto the canvas for the configured view. The
// visible window is the workspace grown by a quarter on every side.
cv::Point project(const CameraConfig& c, const WorkspaceBounds& b, Vec3 p) {
  auto axis = [](double v, Interval i, int pixels, bool flip) {
    const double margin = 0.25 * (i.max - i.min);
    double t = (v - (i.min - margin)) / ((i.max - i.min) + 2 * margin);
    if (flip) t = 1.0 - t;
    return static_cast<int>(std::lround(std::clamp(t, -1.0, 2.0) * (pixels - 1)));
  };
  const int u = axis(p.y, b.y, c.width, true);
  const int v = c.view == "top" ? axis(p.x, b.x, c.height, true) : axis(p.z, b.z, c.height, true);
  return {u, v};
}

}  // namespace

void CameraConfig::validate() const {
  if (name.empty() || name.find_first_of("/ ") != std::string::npos) {
    throw std::invalid_argument(fmt::format("camera.name '{}' must be a non-empty single token", name));
  }
  if (width < 8 || height < 8 || width > 4096 || height > 4096) {
    throw std::invalid_argument(fmt::format("camera {}: width/height out of range", name));
  }
  if (!(rate_hz > 0.0 && rate_hz <= 1000.0)) {
    throw std::invalid_argument(fmt::format("camera {}: rate_hz must be in (0, 1000]", name));
  }
  if (producer == CameraProducer::synthetic && view != "front" && view != "top") {
    throw std::invalid_argument(fmt::format("camera {}: view must be front or top", name));
  }
  if (producer == CameraProducer::image_sequence && directory.empty()) {
    throw std::invalid_argument(fmt::format("camera {}: directory is required for image sequences", name));
  }
}

Image render_synthetic(const CameraConfig& config, const WorkspaceBounds& bounds,
                       const std::optional<RobotState>& state) {
  Image img;
  img.width = config.width;
  img.height = config.height;
  img.rgb.resize(static_cast<std::size_t>(config.width) * config.height * 3);
  uint64_t s = config.seed ^ fnv1a(config.name);
  for (uint8_t& px : img.rgb) px = static_cast<uint8_t>(40 + (splitmix64(s) & 0x1F));

  cv::Mat canvas(img.height, img.width, CV_8UC3, img.rgb.data());
  const Vec3 lo{bounds.x.min, bounds.y.min, bounds.z.min};
  const Vec3 hi{bounds.x.max, bounds.y.max, bounds.z.max};
  cv::rectangle(canvas, project(config, bounds, lo), project(config, bounds, hi),
                cv::Scalar(200, 200, 200), 1);
  if (state) {
    const cv::Point base = project(config, bounds, {0.0, 0.0, 0.15});
    const cv::Point ee = project(config, bounds, state->ee_position);
    cv::line(canvas, base, ee, cv::Scalar(90, 140, 230), 2);
    const cv::Scalar color = state->gripper_closed ? cv::Scalar(230, 60, 60) : cv::Scalar(60, 220, 90);
    cv::circle(canvas, ee, std::max(2, config.width / 32), color, cv::FILLED);
  }
  return img;
}

CameraSource::CameraSource(Bus& bus, std::string ns, CameraConfig config, WorkspaceBounds bounds)
    : bus_(bus),
      config_(std::move(config)),
      bounds_(bounds),
      topic_(topics::camera(ns, config_.name)),
      feedback_topic_(ns, topics::kRobotFeedback),
      period_(from_seconds(1.0 / config_.rate_hz)) {
  config_.validate();
  bus_.advertise(topic_, PayloadKind::camera_frame);
  if (config_.producer == CameraProducer::image_sequence) {
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(config_.directory, ec)) {
      const auto ext = e.path().extension().string();
      if (e.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp")) {
        files.push_back(e.path());
      }
    }
    if (ec) throw std::invalid_argument(fmt::format("camera {}: cannot read {}", config_.name, config_.directory.string()));
    if (files.empty()) {
      throw std::invalid_argument(fmt::format("camera {}: no images in {}", config_.name, config_.directory.string()));
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      Image raw = load_image(f);
      if (raw.width != config_.width || raw.height != config_.height) {
        cv::Mat src(raw.height, raw.width, CV_8UC3, raw.rgb.data());
        cv::Mat dst;
        cv::resize(src, dst, cv::Size(config_.width, config_.height), 0, 0, cv::INTER_AREA);
        raw.width = config_.width;
        raw.height = config_.height;
        raw.rgb.assign(dst.data, dst.data + dst.total() * 3);
      }
      sequence_.push_back(std::make_shared<const Image>(std::move(raw)));
    }
  }
}

void CameraSource::step(Nanos now) {
  if (!next_) next_ = now;
  if (now < *next_) return;
  while (*next_ <= now) *next_ += period_;
  if (frozen_) return;

  std::shared_ptr<const Image> image;
  if (config_.producer == CameraProducer::synthetic) {
    std::optional<RobotState> state;
    if (auto e = bus_.latest(feedback_topic_); e && e->kind() == PayloadKind::robot_state) {
      state = e->get<RobotState>();
    }
    image = std::make_shared<const Image>(render_synthetic(config_, bounds_, state));
  } else {
    image = sequence_[published_ % sequence_.size()];
  }
  bus_.publish(topic_, CameraFrame{config_.name, std::move(image), published_});
  ++published_;
}

}  // namespace teleop
