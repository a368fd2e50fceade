#include "teleop/robot/bridge.hpp"

#include <spdlog/spdlog.h>

#include "teleop/topics.hpp"

namespace teleop::robot {

BridgeNode::BridgeNode(Bus& bus, std::string ns, std::unique_ptr<RobotDriver> driver,
                       BridgeConfig config)
    : bus_(bus),
      ns_(normalize_namespace(ns)),
      driver_(std::move(driver)),
      config_(std::move(config)),
      feedback_period_(from_seconds(1.0 / config_.feedback_rate)),
      target_sub_(bus.subscribe(TopicName(ns_, topics::kTargetPose), QosProfile::keep_last(1),
                                PayloadKind::target)),
      gripper_sub_(bus.subscribe(TopicName(ns_, topics::kGripperCmd), QosProfile::keep_last(1),
                                 PayloadKind::gripper)),
      feedback_topic_(ns_, topics::kRobotFeedback),
      health_topic_(ns_, topics::kBridgeHealth),
      backoff_(config_.initial_backoff) {
  if (!(config_.feedback_rate > 0.0)) throw std::invalid_argument("bridge.feedback_rate: must be > 0");
  bus.advertise(feedback_topic_, PayloadKind::robot_state);
  bus.advertise(health_topic_, PayloadKind::health);
}

BridgeNode::~BridgeNode() { stop(); }

BridgeCounters BridgeNode::counters() const {
  std::lock_guard lock(driver_mu_);
  return counters_;
}

void BridgeNode::publish_health(Health h, const std::string& detail) {
  bus_.publish(health_topic_, HealthEvent{"bridge" + ns_, h, detail});
}

void BridgeNode::on_connection_error(const std::exception& e, Nanos now) {
  connected_ = false;
  ++counters_.connection_failures;
  next_retry_ = now + backoff_;
  backoff_ = std::min(backoff_ * 2, config_.max_backoff);
  if (!degraded_reported_) {
    spdlog::warn("bridge{}: connection lost: {}", ns_, e.what());
    publish_health(Health::degraded, e.what());
    degraded_reported_ = true;
  }
}

bool BridgeNode::ensure_connected(Nanos now) {
  if (connected_) return true;
  if (now < next_retry_) return false;
  try {
    driver_->connect();
  } catch (const ConnectionError& e) {
    on_connection_error(e, now);
    return false;
  }
  connected_ = true;
  backoff_ = config_.initial_backoff;
  if (ever_connected_) {
    ++counters_.reconnects;
    // Anything queued while the link was down is stale by definition.
    counters_.stale_dropped += target_sub_.clear();
    counters_.stale_dropped += gripper_sub_.clear();
  }
  ever_connected_ = true;
  if (degraded_reported_) {
    publish_health(Health::ok, "reconnected");
    degraded_reported_ = false;
  }
  return true;
}

void BridgeNode::forward_pending() {
  if (auto g = gripper_sub_.poll()) {
    driver_->send_gripper(g->get<GripperCommand>().closed, g->sequence);
    ++counters_.gripper_sent;
  }
  // Depth 1: at most the freshest target is waiting.
  if (auto t = target_sub_.poll()) {
    driver_->send_command(to_wire(t->get<TargetPose>(), t->sequence));
    ++counters_.commands_sent;
  }
}

void BridgeNode::publish_feedback() {
  const WireState raw = driver_->read_state();
  RobotState s = from_wire_state(raw);
  s.joints = placeholder_joints(s.ee_position, s.ee_orientation, config_.kinematics);
  s.stamp = bus_.clock().now();
  bus_.publish(feedback_topic_, s);
  ++counters_.feedback_published;
}

void BridgeNode::step(Nanos now) {
  std::lock_guard lock(driver_mu_);
  if (!ensure_connected(now)) return;
  try {
    forward_pending();
    if (!next_feedback_) next_feedback_ = now;
    if (now >= *next_feedback_) {
      publish_feedback();
      *next_feedback_ += feedback_period_;
      if (*next_feedback_ <= now) next_feedback_ = now + feedback_period_;
    }
  } catch (const ConnectionError& e) {
    on_connection_error(e, now);
  }
}

void BridgeNode::start() {
  if (running_.exchange(true)) return;
  drain_thread_ = std::thread([this] { drain_loop(); });
  feedback_thread_ = std::thread([this] { feedback_loop(); });
}

void BridgeNode::stop() {
  if (!running_.exchange(false)) return;
  driver_->interrupt();
  if (drain_thread_.joinable()) drain_thread_.join();
  if (feedback_thread_.joinable()) feedback_thread_.join();
}

void BridgeNode::drain_loop() {
  while (running_) {
    auto t = target_sub_.wait(std::chrono::milliseconds(20));
    std::lock_guard lock(driver_mu_);
    const Nanos now = bus_.clock().now();
    if (!ensure_connected(now)) continue;
    try {
      if (auto g = gripper_sub_.poll()) {
        driver_->send_gripper(g->get<GripperCommand>().closed, g->sequence);
        ++counters_.gripper_sent;
      }
      if (t) {
        // A newer target may have replaced it while we waited for the lock.
        if (auto newer = target_sub_.poll()) t = std::move(newer);
        driver_->send_command(to_wire(t->get<TargetPose>(), t->sequence));
        ++counters_.commands_sent;
      }
    } catch (const ConnectionError& e) {
      if (running_) on_connection_error(e, now);
    }
  }
}

void BridgeNode::feedback_loop() {
  auto next = std::chrono::steady_clock::now();
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(feedback_period_);
  while (running_) {
    next += period;
    std::this_thread::sleep_until(next);
    std::lock_guard lock(driver_mu_);
    const Nanos now = bus_.clock().now();
    if (!running_ || !ensure_connected(now)) continue;
    try {
      publish_feedback();
    } catch (const ConnectionError& e) {
      if (running_) on_connection_error(e, now);
    }
  }
}

}  // namespace teleop::robot
