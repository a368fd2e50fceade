#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

#include "teleop/bus.hpp"
#include "teleop/clock.hpp"
#include "teleop/gateway.hpp"
#include "teleop/orchestrator/config.hpp"
#include "teleop/orchestrator/phone_client.hpp"
#include "teleop/planner.hpp"
#include "teleop/recorder/camera.hpp"
#include "teleop/recorder/recorder.hpp"
#include "teleop/recorder/storage.hpp"
#include "teleop/robot/bridge.hpp"
#include "teleop/robot/controller.hpp"

namespace teleop {

/// The nodes serving one namespace.
struct ArmStack {
  ArmProfile profile;
  std::unique_ptr<robot::MockController> controller;
  std::unique_ptr<robot::BridgeNode> bridge;
  std::unique_ptr<PlannerNode> planner;
  std::vector<std::unique_ptr<CameraSource>> cameras;
  std::unique_ptr<RecorderNode> recorder;
};

/// Builds and runs everything a launch profile describes.
///
/// Virtual clock: nothing moves until wait() steps the scheduler, one tick
/// at a time, in the order planner, bridge, cameras, recorder. Only the
/// gateway and the mock controllers run on their own threads.
/// Wall clock: bridges run their own threads and a node loop steps the
/// planner, cameras and recorder every tick; wait() just sleeps.
class System {
 public:
  /// `storage` defaults to the local filesystem.
  explicit System(LaunchProfile profile, Storage* storage = nullptr);
  ~System();
  System(const System&) = delete;
  System& operator=(const System&) = delete;

  /// Binds the gateway and controllers. Throws StartupError naming the port.
  void start();
  void stop();
  bool running() const { return running_; }

  /// Advances (virtual) or sleeps (wall) for d.
  void wait(Nanos d);
  /// One scheduler tick. Virtual clock only.
  void tick();

  const LaunchProfile& profile() const { return profile_; }
  const Clock& clock() const { return *clock_; }
  Bus& bus() { return *bus_; }
  Gateway& gateway() { return *gateway_; }
  uint16_t gateway_port() const { return gateway_->port(); }
  std::vector<ArmStack>& arms() { return arms_; }
  ArmStack& arm(std::string_view ns);

  /// Held by the wall-clock node loop while it steps; take it before
  /// reading planner state from another thread.
  std::unique_lock<std::mutex> lock_nodes() { return std::unique_lock(nodes_mu_); }

 private:
  void step_nodes(Nanos now, bool with_bridges);
  void node_loop();

  LaunchProfile profile_;
  std::unique_ptr<Clock> clock_;
  VirtualClock* virtual_clock_ = nullptr;
  std::unique_ptr<Storage> owned_storage_;
  Storage* storage_;
  std::unique_ptr<Bus> bus_;
  std::unique_ptr<Gateway> gateway_;
  std::vector<ArmStack> arms_;

  std::mutex nodes_mu_;
  bool running_ = false;
  std::atomic<bool> loop_running_{false};
  std::thread loop_;
};

/// Drives phone clients against a System in lockstep: every send is
/// followed by waiting until the gateway has handled it, so that in
/// virtual time the frame lands on the bus before the next tick.
class Operator {
 public:
  explicit Operator(System& system);

  PhoneClient& connect(std::string_view ns, std::string frame_id = "phone");
  /// Blocks until the gateway has processed every frame sent so far.
  void sync();

  void pose(PhoneClient& c, Vec3 position, const Rpy& rpy = {});
  void press(PhoneClient& c, Button b);
  void record(PhoneClient& c, RecorderAction a, const std::string& task = {});

  System& system() { return system_; }

 private:
  System& system_;
  uint64_t base_;
  std::vector<std::unique_ptr<PhoneClient>> clients_;
};

}  // namespace teleop
