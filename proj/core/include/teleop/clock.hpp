#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace teleop {

/// Monotonic time since the owning clock's epoch.
using Nanos = std::chrono::nanoseconds;

using namespace std::chrono_literals;

inline double to_seconds(Nanos t) { return std::chrono::duration<double>(t).count(); }
inline Nanos from_seconds(double s) {
  return std::chrono::duration_cast<Nanos>(std::chrono::duration<double>(s));
}

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Nanos now() const = 0;
  virtual bool is_virtual() const = 0;
};

class SteadyClock final : public Clock {
 public:
  SteadyClock() : epoch_(std::chrono::steady_clock::now()) {}
  Nanos now() const override {
    return std::chrono::duration_cast<Nanos>(std::chrono::steady_clock::now() - epoch_);
  }
  bool is_virtual() const override { return false; }

 private:
  std::chrono::steady_clock::time_point epoch_;
};

/// Advances only when told to. Reads are thread-safe.
class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(Nanos start = Nanos{0}) : now_(start.count()) {}

  Nanos now() const override { return Nanos{now_.load(std::memory_order_acquire)}; }
  bool is_virtual() const override { return true; }

  void advance(Nanos d) { now_.fetch_add(d.count(), std::memory_order_acq_rel); }
  void set(Nanos t) { now_.store(t.count(), std::memory_order_release); }

 private:
  std::atomic<int64_t> now_;
};

}  // namespace teleop
