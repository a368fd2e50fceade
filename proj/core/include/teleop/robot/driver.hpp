#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>

#include "teleop/robot/socket.hpp"
#include "teleop/robot/wire.hpp"

namespace teleop::robot {

class ConnectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The four calls a bridge needs from a robot. Implementations throw
/// ConnectionError when the link is lost; the bridge reconnects.
class RobotDriver {
 public:
  virtual ~RobotDriver() = default;
  virtual void connect() = 0;
  virtual void send_command(const WireCommand& command) = 0;
  virtual WireState read_state() = 0;
  virtual void send_gripper(bool closed, uint64_t seq) = 0;
  /// Unblocks any call in progress from another thread. Optional.
  virtual void interrupt() {}
};

/// Speaks the line protocol over TCP with TCP_NODELAY, one request and one
/// STATE reply at a time.
class TcpWireDriver final : public RobotDriver {
 public:
  TcpWireDriver(std::string host, uint16_t port,
                std::chrono::milliseconds reply_timeout = std::chrono::seconds(10));

  void connect() override;
  void send_command(const WireCommand& command) override;
  WireState read_state() override;
  void send_gripper(bool closed, uint64_t seq) override;
  void interrupt() override;

  /// Last STATE reply, from any request.
  const WireState& last_state() const { return last_state_; }

 private:
  WireState request(const WireMessage& msg);

  std::string host_;
  uint16_t port_;
  std::chrono::milliseconds reply_timeout_;
  net::Socket socket_;
  std::mutex fd_mu_;
  int fd_ = -1;
  uint64_t poll_seq_ = 0;
  WireState last_state_;
};

}  // namespace teleop::robot
