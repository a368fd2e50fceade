#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "teleop/bus.hpp"
#include "teleop/clock.hpp"
#include "teleop/errors.hpp"

namespace teleop {

struct RateReport {
  std::size_t samples = 0;
  double mean_interval_ms = 0.0;
  double jitter_ms = 0.0;  // standard deviation of the intervals
  uint64_t drop_estimate = 0;
};

/// Sliding-window inter-arrival statistics against a nominal period. A gap
/// of k nominal periods counts as k - 1 missed samples.
class RateMonitor {
 public:
  explicit RateMonitor(Nanos nominal_period = std::chrono::milliseconds(20),
                       std::size_t window = 100);

  void record(Nanos arrival);
  /// Meaningful once at least two samples have been recorded.
  RateReport report() const;
  std::size_t samples() const { return arrivals_.size(); }

 private:
  Nanos nominal_;
  std::size_t window_;
  std::deque<Nanos> arrivals_;
};

struct GatewayConfig {
  std::string bind_address = "127.0.0.1";
  uint16_t port = 9090;  // 0 picks an ephemeral port
  Nanos nominal_pose_period = std::chrono::milliseconds(20);
  std::size_t rate_window = 100;
  std::chrono::milliseconds forward_interval{5};
  std::size_t max_frame_bytes = 1 << 20;
};

struct ConnectionInfo {
  uint64_t id = 0;
  std::vector<std::string> advertised;
  uint64_t accepted = 0;
  uint64_t rejected = 0;
  RateReport pose_rate;
};

/// WebSocket endpoint speaking the JSON protocol in protocol.hpp. Each
/// accepted pose/button/recorder frame becomes exactly one bus envelope,
/// stamped with the bus clock. Subscribed topics are forwarded back to the
/// client. Malformed frames get an error frame; the connection stays up.
class Gateway {
 public:
  Gateway(Bus& bus, GatewayConfig config);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Throws StartupError naming the port if it cannot bind.
  void start();
  void stop();
  uint16_t port() const;

  /// Text frames handled so far (accepted or rejected), across clients.
  uint64_t frames_processed() const;
  uint64_t frames_rejected() const;
  /// Blocks in wall time until frames_processed() >= count.
  bool wait_processed(uint64_t count, std::chrono::milliseconds timeout) const;
  /// Blocks until at least n clients have completed the handshake.
  bool wait_connections(std::size_t n, std::chrono::milliseconds timeout) const;

  std::vector<ConnectionInfo> connections() const;

  struct Impl;  // opaque; shared with the session objects in the .cpp

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace teleop
