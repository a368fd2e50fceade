#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "teleop/messages.hpp"

namespace teleop {

/// Minimal phone stand-in: a WebSocket client speaking the gateway's JSON
/// protocol for one namespace. Sends are queued and written in order on an
/// internal I/O thread; inbound frames are queued for next_message().
class PhoneClient {
 public:
  PhoneClient(std::string host, uint16_t port, std::string ns = "", std::string frame_id = "phone");
  ~PhoneClient();
  PhoneClient(const PhoneClient&) = delete;
  PhoneClient& operator=(const PhoneClient&) = delete;

  /// Handshakes, then advertises the pose and button topics (two frames).
  /// Throws std::runtime_error when the gateway is unreachable.
  void connect(std::chrono::milliseconds timeout = std::chrono::seconds(5));
  /// Flushes queued frames, then closes the WebSocket.
  void close();
  bool open() const;

  void send_pose(Vec3 position, const Quat& orientation, double stamp_ms);
  void press(Button button, double stamp_ms);
  void recorder(RecorderAction action, const std::string& task = {});
  /// `base` is relative to the namespace, e.g. "phone2act/robot_feedback".
  void subscribe(const std::string& base);
  void send_raw(std::string text);

  /// Next frame from the gateway, parsed; nullopt on timeout or close.
  std::optional<nlohmann::json> next_message(std::chrono::milliseconds timeout);

  /// Frames handed to send_*/subscribe/connect so far.
  uint64_t frames_sent() const;
  const std::string& ns() const { return ns_; }
  const std::string& frame_id() const { return frame_id_; }
  std::string topic(std::string_view base) const;

 private:
  struct Impl;
  std::string host_;
  uint16_t port_;
  std::string ns_;
  std::string frame_id_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace teleop
