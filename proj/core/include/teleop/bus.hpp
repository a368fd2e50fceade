#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "teleop/clock.hpp"
#include "teleop/messages.hpp"

namespace teleop {

/// A namespace prefix ("" or "/left") plus a base name
/// ("phone2act/target_pose"). The full name never contains "//".
class TopicName {
 public:
  TopicName(std::string_view ns, std::string_view base);

  /// Splits a full wire name at the first "phone2act" segment; anything
  /// before it is the namespace. Names without that segment have an empty
  /// namespace.
  static TopicName parse(std::string_view full);

  const std::string& ns() const { return ns_; }
  const std::string& base() const { return base_; }
  std::string full() const;

  friend bool operator==(const TopicName&, const TopicName&) = default;

 private:
  std::string ns_;
  std::string base_;
};

/// Normalizes "left", "/left/", "/left" to "/left"; "" and "/" to "".
std::string normalize_namespace(std::string_view ns);

enum class Reliability { best_effort, reliable };

struct QosProfile {
  std::size_t depth = 8;
  Reliability reliability = Reliability::best_effort;
  bool exclusive = false;

  static QosProfile keep_last(std::size_t depth) { return {depth, Reliability::best_effort, false}; }
  static QosProfile reliable(std::size_t depth) { return {depth, Reliability::reliable, false}; }
};

enum class PayloadKind {
  pose,
  button,
  target,
  gripper,
  robot_state,
  camera_frame,
  health,
  planner_status,
  recorder_command,
  recorder_status,
  connection,
};

// Alternative order matches PayloadKind.
using Payload = std::variant<PoseSample, ButtonEvent, TargetPose, GripperCommand, RobotState,
                             CameraFrame, HealthEvent, PlannerStatus, RecorderCommand,
                             RecorderStatus, ConnectionEvent>;

std::string_view to_string(PayloadKind kind);

struct Envelope {
  TopicName topic;
  Nanos publish_time{0};
  uint64_t sequence = 0;  // per topic, starts at 1
  uint64_t order = 0;     // bus-wide publication order
  Payload payload;

  PayloadKind kind() const { return static_cast<PayloadKind>(payload.index()); }
  template <class T>
  const T& get() const {
    return std::get<T>(payload);
  }
};

class BusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class TypeMismatchError : public BusError {
 public:
  using BusError::BusError;
};
class ConflictError : public BusError {
 public:
  using BusError::BusError;
};
class QueueOverflowError : public BusError {
 public:
  using BusError::BusError;
};

namespace detail {
struct BusCore;
struct SubscriptionQueue;
}  // namespace detail

/// Consumer end of one subscription. Move-only; unsubscribes on
/// destruction. Owned by one consumer at a time.
class Subscription {
 public:
  Subscription() = default;
  Subscription(Subscription&&) noexcept;
  Subscription& operator=(Subscription&&) noexcept;
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  ~Subscription();

  std::optional<Envelope> poll();
  std::vector<Envelope> drain();
  /// Blocks in wall time up to timeout for one envelope.
  std::optional<Envelope> wait(std::chrono::milliseconds timeout);
  /// Discards everything pending; returns how many were dropped.
  std::size_t clear();

  std::size_t pending() const;
  /// Envelopes evicted by keep-last before being consumed.
  uint64_t evicted() const;
  const TopicName& topic() const;
  bool valid() const { return queue_ != nullptr; }

 private:
  friend class Bus;
  Subscription(std::shared_ptr<detail::SubscriptionQueue> q, std::weak_ptr<detail::BusCore> core);
  void reset();

  std::shared_ptr<detail::SubscriptionQueue> queue_;
  std::weak_ptr<detail::BusCore> core_;
};

/// In-process publish/subscribe fabric. Topics are matched by exact full
/// name; a topic's payload type is fixed by whoever touches it first.
/// Thread-safe; publish never waits on a consumer.
class Bus {
 public:
  explicit Bus(const Clock& clock);
  ~Bus();
  Bus(const Bus&) = delete;
  Bus& operator=(const Bus&) = delete;

  void advertise(const TopicName& topic, PayloadKind kind);

  /// Returns the per-topic sequence number assigned to the envelope.
  /// Throws TypeMismatchError, or QueueOverflowError if a reliable
  /// subscription is full (the other subscriptions still receive it).
  uint64_t publish(const TopicName& topic, Payload payload);

  Subscription subscribe(const TopicName& topic, QosProfile qos,
                         std::optional<PayloadKind> kind = std::nullopt);

  std::optional<Envelope> latest(const TopicName& topic) const;
  std::optional<PayloadKind> kind_of(const TopicName& topic) const;
  std::vector<std::string> topics() const;

  const Clock& clock() const { return clock_; }

 private:
  const Clock& clock_;
  std::shared_ptr<detail::BusCore> core_;
};

}  // namespace teleop
