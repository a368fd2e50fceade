#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "teleop/clock.hpp"
#include "teleop/errors.hpp"
#include "teleop/robot/sim_arm.hpp"
#include "teleop/robot/socket.hpp"
#include "teleop/robot/wire.hpp"

namespace teleop::robot {

struct ControllerConfig {
  std::string bind_address = "127.0.0.1";
  uint16_t port = 29999;  // 0 picks an ephemeral port
  SimArmConfig sim;
};

/// Loopback stand-in for a robot controller's real-time port. Owns a
/// SimArm, advances it to the injected clock on every request, and answers
/// each request line with one STATE line.
class MockController {
 public:
  MockController(const Clock& clock, ControllerConfig config);
  ~MockController();
  MockController(const MockController&) = delete;
  MockController& operator=(const MockController&) = delete;

  /// Throws StartupError naming the port if it cannot bind.
  void start();
  void stop();
  uint16_t port() const { return port_; }

  /// While stalled, requests are read and logged but not answered.
  void set_stalled(bool stalled);

  /// Sequence numbers of MOVL lines in arrival order.
  std::vector<uint64_t> received_command_seqs() const;
  /// Full MOVL requests in arrival order, as parsed off the wire.
  std::vector<WireCommand> received_commands() const;
  std::size_t requests_received() const { return requests_received_.load(); }
  std::size_t parse_errors() const { return parse_errors_.load(); }
  RobotState state();

  /// Drops the current client connection (fault injection).
  void drop_client();

 private:
  void accept_loop();
  void serve(net::Socket client);
  std::string handle(const std::string& line);

  const Clock& clock_;
  ControllerConfig config_;
  uint16_t port_ = 0;
  net::Socket listener_;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::vector<std::thread> client_threads_;
  std::mutex clients_mu_;
  std::vector<int> client_fds_;

  mutable std::mutex mu_;
  std::condition_variable stall_cv_;
  bool stalled_ = false;
  SimArm arm_;
  std::vector<WireCommand> commands_;
  std::atomic<std::size_t> requests_received_{0};
  std::atomic<std::size_t> parse_errors_{0};
};

}  // namespace teleop::robot
