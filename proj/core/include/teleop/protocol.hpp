#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "teleop/bus.hpp"
#include "teleop/messages.hpp"

namespace teleop::protocol {

// rosbridge-style subset. Every frame is a JSON object with "op" and
// "topic"; "publish" also carries "msg".
//
//   {"op":"advertise","topic":"/left/phone2act/phone_pose","type":"geometry_msgs/PoseStamped"}
//   {"op":"publish","topic":"/left/phone2act/phone_pose","msg":{
//       "header":{"stamp":1234.5,"frame_id":"phone-a"},
//       "pose":{"position":{"x":0,"y":0,"z":0},
//               "orientation":{"x":0,"y":0,"z":0,"w":1}}}}
//   {"op":"publish","topic":"/left/phone2act/button","msg":{"button":"volume_up","stamp":1250}}
//   {"op":"subscribe","topic":"/left/phone2act/robot_feedback"}
//
// Errors come back as {"op":"status","level":"error","msg":"..."}.

enum class Op { advertise, publish, subscribe, unsubscribe };

struct WireMessage {
  Op op = Op::publish;
  std::string topic;
  std::optional<std::string> type;
  nlohmann::json msg;  // object for publish, null otherwise
  std::optional<std::string> id;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Accepted |norm - 1| before a quaternion is rejected rather than
/// renormalized.
inline constexpr double kQuatNormTolerance = 0.05;

/// Parses and validates the envelope of one text frame. Throws DecodeError.
WireMessage parse_frame(std::string_view text);

/// Accepts either PoseStamped shape ({header, pose:{position, orientation}})
/// or a bare {position, orientation}. header.stamp may be a number of
/// milliseconds or {sec, nanosec}. Throws DecodeError naming the field.
PoseSample decode_pose(const nlohmann::json& msg);
ButtonEvent decode_button(const nlohmann::json& msg);
RecorderCommand decode_recorder_command(const nlohmann::json& msg);

/// Payload kind a client may publish on this topic, from the advertised
/// ROS type name or else the last segment of the base name.
std::optional<PayloadKind> client_kind(const TopicName& topic,
                                       const std::optional<std::string>& type);

nlohmann::json encode_pose(const PoseSample& p);
nlohmann::json encode_button(const ButtonEvent& b);
nlohmann::json encode_payload(const Payload& payload, Nanos stamp);

std::string publish_frame(const std::string& topic, const nlohmann::json& msg);
std::string advertise_frame(const std::string& topic, std::string_view type);
std::string subscribe_frame(const std::string& topic);
std::string error_frame(std::string_view message, const std::optional<std::string>& id = {});

std::string_view to_string(Button b);

}  // namespace teleop::protocol
