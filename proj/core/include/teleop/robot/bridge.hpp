#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "teleop/bus.hpp"
#include "teleop/robot/driver.hpp"
#include "teleop/robot/sim_arm.hpp"

namespace teleop::robot {

struct BridgeConfig {
  double feedback_rate = 100.0;  // Hz
  Nanos initial_backoff = std::chrono::milliseconds(100);
  Nanos max_backoff = std::chrono::seconds(2);
  // Geometry and limits used to fill RobotState::joints.
  SimArmConfig kinematics;
};

struct BridgeCounters {
  uint64_t commands_sent = 0;
  uint64_t gripper_sent = 0;
  uint64_t feedback_published = 0;
  uint64_t connection_failures = 0;
  uint64_t reconnects = 0;
  uint64_t stale_dropped = 0;
};

/// Generic hardware bridge: target_pose (keep-last depth 1, best effort)
/// and gripper_cmd in, robot_feedback out, at feedback_rate. The robot
/// specifics live entirely in the RobotDriver.
///
/// Runs either stepped from a scheduler (step) or as two threads
/// (start/stop): a command drain loop and a feedback poll loop sharing the
/// driver.
class BridgeNode {
 public:
  BridgeNode(Bus& bus, std::string ns, std::unique_ptr<RobotDriver> driver, BridgeConfig config);
  ~BridgeNode();
  BridgeNode(const BridgeNode&) = delete;
  BridgeNode& operator=(const BridgeNode&) = delete;

  void step(Nanos now);

  void start();
  void stop();

  bool connected() const { return connected_.load(); }
  BridgeCounters counters() const;
  const std::string& ns() const { return ns_; }

 private:
  bool ensure_connected(Nanos now);
  void forward_pending();
  void publish_feedback();
  void on_connection_error(const std::exception& e, Nanos now);
  void publish_health(Health h, const std::string& detail);

  void drain_loop();
  void feedback_loop();

  Bus& bus_;
  std::string ns_;
  std::unique_ptr<RobotDriver> driver_;
  BridgeConfig config_;
  Nanos feedback_period_;

  Subscription target_sub_;
  Subscription gripper_sub_;
  TopicName feedback_topic_;
  TopicName health_topic_;

  mutable std::mutex driver_mu_;
  std::atomic<bool> connected_{false};
  bool ever_connected_ = false;
  bool degraded_reported_ = false;
  Nanos next_retry_{0};
  Nanos backoff_;
  std::optional<Nanos> next_feedback_;
  BridgeCounters counters_;

  std::atomic<bool> running_{false};
  std::thread drain_thread_;
  std::thread feedback_thread_;
};

}  // namespace teleop::robot
