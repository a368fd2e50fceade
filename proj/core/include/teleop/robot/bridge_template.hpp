#pragma once

// Starting point for a new robot. Copy this file, rename the class, and
// fill in the four calls with the vendor API. BridgeNode already handles
// topics, keep-last command freshness, feedback rate, reconnect backoff
// and stale-command dropping, so nothing else needs to change:
//
//   auto driver = std::make_unique<MyRobotDriver>(...);
//   teleop::robot::BridgeNode bridge(bus, "/left", std::move(driver), config);
//   bridge.start();
//
// Units at this boundary are controller units: millimeters and extrinsic
// X-Y-Z Euler degrees (see wire.hpp). Throw ConnectionError when the link
// drops.

#include <stdexcept>

#include "teleop/robot/driver.hpp"

namespace teleop::robot {

class TemplateDriver final : public RobotDriver {
 public:
  void connect() override { unimplemented("connect"); }

  void send_command(const WireCommand& /*command*/) override { unimplemented("send_command"); }

  WireState read_state() override {
    unimplemented("read_state");
    return {};
  }

  void send_gripper(bool /*closed*/, uint64_t /*seq*/) override { unimplemented("send_gripper"); }

 private:
  [[noreturn]] static void unimplemented(const char* call) {
    throw std::logic_error(std::string("TemplateDriver::") + call +
                           ": insert the robot API call here");
  }
};

}  // namespace teleop::robot
