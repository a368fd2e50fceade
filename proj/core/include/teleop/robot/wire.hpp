#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "teleop/messages.hpp"

namespace teleop::robot {

// Line grammar spoken by the mock controller. Every request gets exactly
// one STATE reply.
//
//   MOVL x,y,z,rx,ry,rz,seq\n        millimeters / degrees
//   GRIP g,seq\n                     g in {0,1}
//   POLL seq\n
//   STATE x,y,z,rx,ry,rz,grip,seq\n  reply, seq echoes the request

/// Cartesian command in controller units: millimeters and extrinsic X-Y-Z
/// Euler degrees.
struct WireCommand {
  double x = 0.0, y = 0.0, z = 0.0;
  double rx = 0.0, ry = 0.0, rz = 0.0;
  uint64_t seq = 0;
};

struct WireState {
  double x = 0.0, y = 0.0, z = 0.0;
  double rx = 0.0, ry = 0.0, rz = 0.0;
  bool gripper_closed = false;
  uint64_t seq = 0;
};

struct GripRequest {
  bool closed = false;
  uint64_t seq = 0;
};

struct PollRequest {
  uint64_t seq = 0;
};

using WireMessage = std::variant<WireCommand, WireState, GripRequest, PollRequest>;

class WireParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Meters to millimeters; orientation via quat_to_rpy, radians to degrees.
/// Gimbal-locked orientations still convert (yaw folded into roll).
WireCommand to_wire(const TargetPose& target, uint64_t seq = 0);
WireState to_wire_state(const RobotState& state, uint64_t seq = 0);

/// Back to meters and a canonical quaternion. Joints are left zero; the
/// bridge fills them from its kinematics. Throws WireParseError on
/// non-finite fields.
RobotState from_wire_state(const WireState& raw);

std::string format_line(const WireMessage& msg);
/// Accepts a line with or without its trailing newline.
WireMessage parse_line(std::string_view line);

}  // namespace teleop::robot
