#include "teleop/recorder/recorder.hpp"

#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleop/topics.hpp"

namespace teleop {

void RecorderConfig::validate() const {
  if (cameras.empty()) throw std::invalid_argument("recorder.cameras must name at least one camera");
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    if (cameras[i].empty()) throw std::invalid_argument("recorder.cameras contains an empty name");
    for (std::size_t j = 0; j < i; ++j) {
      if (cameras[i] == cameras[j]) {
        throw std::invalid_argument(fmt::format("recorder.cameras lists '{}' twice", cameras[i]));
      }
    }
  }
  if (fps != dataset::kFps) {
    throw std::invalid_argument(fmt::format("recorder.fps must be {}", dataset::kFps));
  }
  if (freshness_window <= Nanos{0}) throw std::invalid_argument("recorder.freshness_window must be positive");
  if (memory_ceiling_bytes == 0) throw std::invalid_argument("recorder.memory_ceiling_bytes must be positive");
  if (export_config.root.empty()) throw std::invalid_argument("recorder.output_root must be set");
  if (export_config.video.mode == VideoMode::mp4 && export_config.video.codec.size() != 4) {
    throw std::invalid_argument("recorder.codec must be a four-character code");
  }
}

RecorderNode::RecorderNode(Bus& bus, std::string ns, RecorderConfig config, Storage& storage)
    : bus_(bus),
      ns_(normalize_namespace(ns)),
      config_(std::move(config)),
      storage_(storage),
      period_(from_seconds(1.0 / config_.fps)),
      target_topic_(ns_, topics::kTargetPose),
      gripper_topic_(ns_, topics::kGripperCmd),
      status_topic_(ns_, topics::kRecorderStatus) {
  config_.validate();
  const TopicName control(ns_, topics::kRecorderControl);
  bus_.advertise(control, PayloadKind::recorder_command);
  bus_.advertise(status_topic_, PayloadKind::recorder_status);
  control_ = bus_.subscribe(control, QosProfile::reliable(64), PayloadKind::recorder_command);
  for (const std::string& cam : config_.cameras) gate_topics_.push_back(topics::camera(ns_, cam));
  gate_topics_.emplace_back(ns_, topics::kRobotFeedback);
}

void RecorderNode::step(Nanos now) {
  std::lock_guard lock(mu_);
  while (auto e = control_.poll()) handle(e->get<RecorderCommand>(), now);
  if (!episode_ || now < next_tick_) return;
  tick(now);
  next_tick_ += period_;
  // A late step (wall clock) counts the ticks it missed as skipped.
  while (next_tick_ <= now) {
    next_tick_ += period_;
    ++status_.ticks_skipped;
  }
  publish_status();
}

void RecorderNode::command(const RecorderCommand& cmd, Nanos now) {
  std::lock_guard lock(mu_);
  handle(cmd, now);
}

void RecorderNode::handle(const RecorderCommand& cmd, Nanos now) {
  switch (cmd.action) {
    case RecorderAction::start:
      if (episode_) {
        spdlog::warn("recorder{}: start ignored, already recording", ns_);
        status_.detail = "already recording";
        break;
      }
      episode_ = std::make_unique<Episode>(cmd.task.empty() ? config_.default_task : cmd.task,
                                           config_.cameras);
      started_ = now;
      next_tick_ = now;
      prev_target_.reset();
      status_.phase = RecorderPhase::recording;
      status_.frames = 0;
      status_.ticks_skipped = 0;
      status_.detail.clear();
      break;
    case RecorderAction::stop: {
      if (!episode_) {
        status_.detail = "stop ignored, not recording";
        break;
      }
      std::unique_ptr<Episode> ep = std::move(episode_);
      ep->stop();
      status_.phase = RecorderPhase::idle;
      if (!config_.auto_export) {
        stopped_ = std::move(ep);
        status_.detail = "stopped";
        break;
      }
      try {
        const ManifestDelta d = finalize_episode(*ep, config_.export_config, storage_);
        exports_.push_back(d);
        ++status_.episodes_saved;
        status_.detail = fmt::format("saved episode {} ({} frames)", d.episode_index, d.length);
        spdlog::info("recorder{}: {}", ns_, status_.detail);
      } catch (const FinalizeError& e) {
        last_error_ = e.what();
        status_.phase = RecorderPhase::failed;
        status_.detail = e.what();
        spdlog::error("recorder{}: {}", ns_, e.what());
      }
      break;
    }
    case RecorderAction::discard:
      if (episode_) {
        episode_.reset();
        status_.detail = "episode discarded";
      }
      status_.phase = RecorderPhase::idle;
      break;
  }
  publish_status();
}

void RecorderNode::tick(Nanos now) {
  std::vector<std::optional<Envelope>> latest;
  latest.reserve(gate_topics_.size());
  for (const TopicName& t : gate_topics_) latest.push_back(bus_.latest(t));
  const auto snapshot = sync_gate(latest, now, config_.freshness_window);
  if (!snapshot) {
    ++status_.ticks_skipped;
    return;
  }
  const Envelope& fb = snapshot->back();
  if (fb.kind() != PayloadKind::robot_state) throw BusError("robot_feedback carries the wrong payload");
  const RobotState& state = fb.get<RobotState>();

  TargetPose cur{state.ee_position, state.ee_orientation, state.stamp};
  if (auto t = bus_.latest(target_topic_); t && t->kind() == PayloadKind::target) cur = t->get<TargetPose>();
  bool gripper = state.gripper_closed;
  if (auto g = bus_.latest(gripper_topic_); g && g->kind() == PayloadKind::gripper) {
    gripper = g->get<GripperCommand>().closed;
  }
  const TargetPose prev = prev_target_.value_or(cur);
  prev_target_ = cur;

  EpisodeFrame frame;
  frame.frame_index = static_cast<uint32_t>(episode_->frames().size());
  frame.timestamp = to_seconds(now - started_);
  frame.observation = make_observation(state);
  frame.action = build_action(prev, cur, gripper);
  frame.target_rpy = quat_to_rpy(cur.orientation).rpy;
  for (std::size_t c = 0; c + 1 < snapshot->size(); ++c) {
    const Envelope& e = (*snapshot)[c];
    if (e.kind() != PayloadKind::camera_frame || !e.get<CameraFrame>().image) {
      throw BusError(fmt::format("{} carries no image", e.topic.full()));
    }
    frame.images.push_back(e.get<CameraFrame>().image);
  }

  if (episode_->bytes() + Episode::frame_bytes(frame) > config_.memory_ceiling_bytes) {
    const std::string reason = fmt::format(
        "memory ceiling of {} bytes exceeded at frame {}; episode discarded",
        config_.memory_ceiling_bytes, frame.frame_index);
    spdlog::error("recorder{}: {}", ns_, reason);
    episode_->fail(reason);
    episode_.reset();
    last_error_ = reason;
    status_.phase = RecorderPhase::failed;
    status_.detail = reason;
    return;
  }
  episode_->append(std::move(frame));
  status_.frames = static_cast<uint32_t>(episode_->frames().size());
}

void RecorderNode::publish_status() { bus_.publish(status_topic_, status_); }

RecorderStatus RecorderNode::status() const {
  std::lock_guard lock(mu_);
  return status_;
}

std::vector<ManifestDelta> RecorderNode::exports() const {
  std::lock_guard lock(mu_);
  return exports_;
}

std::string RecorderNode::last_error() const {
  std::lock_guard lock(mu_);
  return last_error_;
}

std::unique_ptr<Episode> RecorderNode::take_stopped_episode() {
  std::lock_guard lock(mu_);
  return std::move(stopped_);
}

}  // namespace teleop
