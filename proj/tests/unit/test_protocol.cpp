#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "teleop/protocol.hpp"

namespace teleop::protocol {
namespace {

using nlohmann::json;

TEST(Protocol, ParsesEnvelope) {
  const WireMessage m = parse_frame(R"({"op":"advertise","topic":"/left/phone2act/phone_pose",
                                        "type":"geometry_msgs/PoseStamped","id":"a1"})");
  EXPECT_EQ(m.op, Op::advertise);
  EXPECT_EQ(m.topic, "/left/phone2act/phone_pose");
  EXPECT_EQ(m.type, "geometry_msgs/PoseStamped");
  EXPECT_EQ(m.id, "a1");
  EXPECT_EQ(parse_frame(R"({"op":"subscribe","topic":"/x/phone2act/robot_feedback"})").op, Op::subscribe);
}

TEST(Protocol, RejectsMalformedEnvelopes) {
  EXPECT_THROW(parse_frame("not json"), DecodeError);
  EXPECT_THROW(parse_frame("[1,2]"), DecodeError);
  EXPECT_THROW(parse_frame(R"({"topic":"/a"})"), DecodeError);
  EXPECT_THROW(parse_frame(R"({"op":"teleport","topic":"/a"})"), DecodeError);
  EXPECT_THROW(parse_frame(R"({"op":"publish"})"), DecodeError);
  EXPECT_THROW(parse_frame(R"({"op":"publish","topic":"/a/phone2act/button"})"), DecodeError);
}

TEST(Protocol, DecodesBothPoseShapes) {
  const json stamped = json::parse(R"({"header":{"stamp":1234.5,"frame_id":"p"},
      "pose":{"position":{"x":1,"y":2,"z":3},"orientation":{"x":0,"y":0,"z":0,"w":1}}})");
  const PoseSample a = decode_pose(stamped);
  EXPECT_EQ(a.position, (Vec3{1, 2, 3}));
  EXPECT_EQ(a.stamp_ms, 1234.5);
  EXPECT_EQ(a.frame_id, "p");
  const json bare = json::parse(R"({"position":{"x":1,"y":2,"z":3},"orientation":{"x":0,"y":0,"z":0,"w":1}})");
  EXPECT_EQ(decode_pose(bare).position, a.position);
  const json secs = json::parse(R"({"header":{"stamp":{"sec":2,"nanosec":500000000}},
      "pose":{"position":{"x":0,"y":0,"z":0},"orientation":{"x":0,"y":0,"z":0,"w":1}}})");
  EXPECT_DOUBLE_EQ(decode_pose(secs).stamp_ms, 2500.0);
}

TEST(Protocol, QuaternionNormTolerance) {
  auto with_w = [](double w) {
    json j = json::parse(R"({"position":{"x":0,"y":0,"z":0},"orientation":{"x":0,"y":0,"z":0}})");
    j["orientation"]["w"] = w;
    return j;
  };
  EXPECT_EQ(decode_pose(with_w(1.04)).orientation, Quat::identity());
  EXPECT_THROW(decode_pose(with_w(1.2)), DecodeError);
  EXPECT_THROW(decode_pose(with_w(0.0)), DecodeError);
}

TEST(Protocol, PoseErrorsNameTheField) {
  const json j = json::parse(R"({"position":{"x":0,"y":"oops","z":0},"orientation":{"x":0,"y":0,"z":0,"w":1}})");
  try {
    decode_pose(j);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_NE(std::string(e.what()).find("y"), std::string::npos);
  }
}

TEST(Protocol, ButtonsAndRecorderCommands) {
  EXPECT_EQ(decode_button(json{{"button", "volume_down"}, {"stamp", 5}}).button, Button::volume_down);
  EXPECT_THROW(decode_button(json{{"button", "power"}}), DecodeError);
  const RecorderCommand rc = decode_recorder_command(json{{"command", "start"}, {"task", "pick"}});
  EXPECT_EQ(rc.action, RecorderAction::start);
  EXPECT_EQ(rc.task, "pick");
  EXPECT_THROW(decode_recorder_command(json{{"command", "pause"}}), DecodeError);
}

TEST(Protocol, ClientKinds) {
  EXPECT_EQ(client_kind(TopicName("/l", "phone2act/phone_pose"), std::nullopt), PayloadKind::pose);
  EXPECT_EQ(client_kind(TopicName("", "custom/x"), std::string("geometry_msgs/PoseStamped")), PayloadKind::pose);
  EXPECT_EQ(client_kind(TopicName("", "phone2act/button"), std::nullopt), PayloadKind::button);
  EXPECT_FALSE(client_kind(TopicName("", "phone2act/target_pose"), std::nullopt).has_value());
}

TEST(Protocol, EncodeDecodeRoundTrip) {
  PoseSample p;
  p.position = {0.1, -0.2, 0.3};
  p.orientation = rpy_to_quat({0.1, 0.2, 0.3});
  p.stamp_ms = 42;
  p.frame_id = "f";
  const json frame = json::parse(publish_frame("/a/phone2act/phone_pose", encode_pose(p)));
  const PoseSample q = decode_pose(frame["msg"]);
  EXPECT_EQ(q.position, p.position);
  EXPECT_NEAR(geodesic_distance(q.orientation, p.orientation), 0.0, 1e-12);
  EXPECT_EQ(q.frame_id, "f");
  const ButtonEvent b = decode_button(encode_button({Button::volume_up, 7}));
  EXPECT_EQ(b.button, Button::volume_up);
  EXPECT_EQ(b.stamp_ms, 7);
  const json err = json::parse(error_frame("bad", std::string("x")));
  EXPECT_EQ(err["op"], "status");
  EXPECT_EQ(err["level"], "error");
}

}  // namespace
}  // namespace teleop::protocol
