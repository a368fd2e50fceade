#include "teleop/robot/wire.hpp"

#include <charconv>
#include <cmath>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace teleop::robot {

namespace {

// Avoids "-0.000000" in golden output.
double tidy(double v) { return std::abs(v) < 5e-7 ? 0.0 : v; }

std::vector<std::string_view> split_csv(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (true) {
    const std::size_t j = s.find(',', i);
    out.push_back(s.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i));
    if (j == std::string_view::npos) break;
    i = j + 1;
  }
  return out;
}

double parse_double(std::string_view tok) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw WireParseError("bad number '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) throw WireParseError("non-finite field '" + std::string(tok) + "'");
  return v;
}

uint64_t parse_u64(std::string_view tok) {
  uint64_t v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw WireParseError("bad sequence number '" + std::string(tok) + "'");
  }
  return v;
}

bool parse_flag(std::string_view tok) {
  if (tok == "0") return false;
  if (tok == "1") return true;
  throw WireParseError("bad flag '" + std::string(tok) + "'");
}

void expect_fields(std::string_view verb, const std::vector<std::string_view>& f,
                   std::size_t n) {
  if (f.size() != n) {
    throw WireParseError(fmt::format("{} expects {} fields, got {}", verb, n, f.size()));
  }
}

}  // namespace

WireCommand to_wire(const TargetPose& target, uint64_t seq) {
  const RpyConversion c = quat_to_rpy(target.orientation);
  if (c.gimbal_locked) {
    spdlog::warn("to_wire: gimbal-locked orientation for seq {}, yaw folded into roll", seq);
  }
  return {target.position.x * 1000.0,
          target.position.y * 1000.0,
          target.position.z * 1000.0,
          rad_to_deg(c.rpy.roll),
          rad_to_deg(c.rpy.pitch),
          rad_to_deg(c.rpy.yaw),
          seq};
}

WireState to_wire_state(const RobotState& state, uint64_t seq) {
  const WireCommand c = to_wire(TargetPose{state.ee_position, state.ee_orientation, state.stamp}, seq);
  return {c.x, c.y, c.z, c.rx, c.ry, c.rz, state.gripper_closed, seq};
}

RobotState from_wire_state(const WireState& raw) {
  for (double v : {raw.x, raw.y, raw.z, raw.rx, raw.ry, raw.rz}) {
    if (!std::isfinite(v)) throw WireParseError("non-finite field in robot state");
  }
  RobotState s;
  s.ee_position = {raw.x / 1000.0, raw.y / 1000.0, raw.z / 1000.0};
  s.ee_orientation = rpy_to_quat({deg_to_rad(raw.rx), deg_to_rad(raw.ry), deg_to_rad(raw.rz)});
  s.gripper_closed = raw.gripper_closed;
  return s;
}

std::string format_line(const WireMessage& msg) {
  struct Visitor {
    std::string operator()(const WireCommand& c) const {
      return fmt::format("MOVL {:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", tidy(c.x),
                         tidy(c.y), tidy(c.z), tidy(c.rx), tidy(c.ry), tidy(c.rz), c.seq);
    }
    std::string operator()(const WireState& s) const {
      return fmt::format("STATE {:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", tidy(s.x),
                         tidy(s.y), tidy(s.z), tidy(s.rx), tidy(s.ry), tidy(s.rz),
                         s.gripper_closed ? 1 : 0, s.seq);
    }
    std::string operator()(const GripRequest& g) const {
      return fmt::format("GRIP {},{}\n", g.closed ? 1 : 0, g.seq);
    }
    std::string operator()(const PollRequest& p) const { return fmt::format("POLL {}\n", p.seq); }
  };
  return std::visit(Visitor{}, msg);
}

WireMessage parse_line(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  const std::size_t sp = line.find(' ');
  if (sp == std::string_view::npos) throw WireParseError("missing verb or arguments");
  const std::string_view verb = line.substr(0, sp);
  const auto f = split_csv(line.substr(sp + 1));

  if (verb == "MOVL") {
    expect_fields(verb, f, 7);
    return WireCommand{parse_double(f[0]), parse_double(f[1]), parse_double(f[2]),
                       parse_double(f[3]), parse_double(f[4]), parse_double(f[5]),
                       parse_u64(f[6])};
  }
  if (verb == "STATE") {
    expect_fields(verb, f, 8);
    return WireState{parse_double(f[0]), parse_double(f[1]), parse_double(f[2]),
                     parse_double(f[3]), parse_double(f[4]), parse_double(f[5]),
                     parse_flag(f[6]),   parse_u64(f[7])};
  }
  if (verb == "GRIP") {
    expect_fields(verb, f, 2);
    return GripRequest{parse_flag(f[0]), parse_u64(f[1])};
  }
  if (verb == "POLL") {
    expect_fields(verb, f, 1);
    return PollRequest{parse_u64(f[0])};
  }
  throw WireParseError("unknown verb '" + std::string(verb) + "'");
}

}  // namespace teleop::robot
