#include "teleop/protocol.hpp"

#include <cmath>

#include <fmt/format.h>

namespace teleop::protocol {

using nlohmann::json;

namespace {

const json& field(const json& obj, std::string_view name, std::string_view path) {
  if (!obj.is_object()) throw DecodeError(fmt::format("{}: expected an object", path));
  auto it = obj.find(name);
  if (it == obj.end()) throw DecodeError(fmt::format("missing field {}.{}", path, name));
  return *it;
}

double number(const json& obj, std::string_view name, std::string_view path) {
  const json& v = field(obj, name, path);
  if (!v.is_number()) throw DecodeError(fmt::format("field {}.{} is not a number", path, name));
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw DecodeError(fmt::format("field {}.{} is not finite", path, name));
  return d;
}

double decode_stamp_ms(const json& stamp) {
  if (stamp.is_number()) {
    const double d = stamp.get<double>();
    if (!std::isfinite(d)) throw DecodeError("header.stamp is not finite");
    return d;
  }
  if (stamp.is_object()) {
    return number(stamp, "sec", "header.stamp") * 1e3 +
           number(stamp, "nanosec", "header.stamp") * 1e-6;
  }
  throw DecodeError("header.stamp must be a number or {sec, nanosec}");
}

json vec_json(Vec3 v) { return {{"x", v.x}, {"y", v.y}, {"z", v.z}}; }
json quat_json(const Quat& q) { return {{"x", q.x()}, {"y", q.y()}, {"z", q.z()}, {"w", q.w()}}; }

json stamp_json(Nanos t) {
  const auto ns = t.count();
  return {{"sec", ns / 1'000'000'000}, {"nanosec", ns % 1'000'000'000}};
}

}  // namespace

std::string_view to_string(Button b) {
  return b == Button::volume_up ? "volume_up" : "volume_down";
}

WireMessage parse_frame(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DecodeError(fmt::format("malformed JSON: {}", e.what()));
  }
  if (!j.is_object()) throw DecodeError("frame must be a JSON object");

  WireMessage m;
  if (auto id = j.find("id"); id != j.end() && id->is_string()) m.id = id->get<std::string>();
  auto op = j.find("op");
  if (op == j.end() || !op->is_string()) throw DecodeError("missing field op");
  const auto& ops = op->get_ref<const std::string&>();
  if (ops == "advertise") {
    m.op = Op::advertise;
  } else if (ops == "publish") {
    m.op = Op::publish;
  } else if (ops == "subscribe") {
    m.op = Op::subscribe;
  } else if (ops == "unsubscribe") {
    m.op = Op::unsubscribe;
  } else {
    throw DecodeError(fmt::format("unsupported op '{}'", ops));
  }
  auto topic = j.find("topic");
  if (topic == j.end() || !topic->is_string() || topic->get_ref<const std::string&>().empty()) {
    throw DecodeError("missing field topic");
  }
  m.topic = topic->get<std::string>();
  if (auto type = j.find("type"); type != j.end() && type->is_string()) {
    m.type = type->get<std::string>();
  }
  if (m.op == Op::publish) {
    auto msg = j.find("msg");
    if (msg == j.end() || !msg->is_object()) throw DecodeError("publish requires an object msg");
    m.msg = *msg;
  }
  return m;
}

PoseSample decode_pose(const json& msg) {
  if (!msg.is_object()) throw DecodeError("pose msg must be an object");
  PoseSample p;
  const json* pose = &msg;
  if (auto it = msg.find("pose"); it != msg.end()) pose = &*it;
  if (auto h = msg.find("header"); h != msg.end()) {
    if (!h->is_object()) throw DecodeError("header must be an object");
    if (auto s = h->find("stamp"); s != h->end()) p.stamp_ms = decode_stamp_ms(*s);
    if (auto f = h->find("frame_id"); f != h->end() && f->is_string()) {
      p.frame_id = f->get<std::string>();
    }
  } else if (auto s = msg.find("stamp"); s != msg.end()) {
    p.stamp_ms = decode_stamp_ms(*s);
  }

  const json& pos = field(*pose, "position", "pose");
  p.position = {number(pos, "x", "position"), number(pos, "y", "position"),
                number(pos, "z", "position")};
  const json& ori = field(*pose, "orientation", "pose");
  const double qx = number(ori, "x", "orientation");
  const double qy = number(ori, "y", "orientation");
  const double qz = number(ori, "z", "orientation");
  const double qw = number(ori, "w", "orientation");
  const double n = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
  if (!std::isfinite(n) || std::abs(n - 1.0) > kQuatNormTolerance) {
    throw DecodeError(fmt::format("orientation norm {:.6f} outside 1 +- {}", n, kQuatNormTolerance));
  }
  p.orientation = Quat::from_wxyz(qw, qx, qy, qz);
  return p;
}

ButtonEvent decode_button(const json& msg) {
  const json& b = field(msg, "button", "msg");
  if (!b.is_string()) throw DecodeError("field msg.button is not a string");
  ButtonEvent e;
  const auto& name = b.get_ref<const std::string&>();
  if (name == "volume_up") {
    e.button = Button::volume_up;
  } else if (name == "volume_down") {
    e.button = Button::volume_down;
  } else {
    throw DecodeError(fmt::format("unknown button '{}'", name));
  }
  if (auto s = msg.find("stamp"); s != msg.end()) e.stamp_ms = decode_stamp_ms(*s);
  return e;
}

RecorderCommand decode_recorder_command(const json& msg) {
  const json& c = field(msg, "command", "msg");
  if (!c.is_string()) throw DecodeError("field msg.command is not a string");
  RecorderCommand rc;
  const auto& name = c.get_ref<const std::string&>();
  if (name == "start") {
    rc.action = RecorderAction::start;
  } else if (name == "stop") {
    rc.action = RecorderAction::stop;
  } else if (name == "discard") {
    rc.action = RecorderAction::discard;
  } else {
    throw DecodeError(fmt::format("unknown recorder command '{}'", name));
  }
  if (auto t = msg.find("task"); t != msg.end() && t->is_string()) rc.task = t->get<std::string>();
  return rc;
}

std::optional<PayloadKind> client_kind(const TopicName& topic,
                                       const std::optional<std::string>& type) {
  if (type) {
    if (*type == "geometry_msgs/PoseStamped" || *type == "geometry_msgs/msg/PoseStamped") {
      return PayloadKind::pose;
    }
    if (*type == "phone2act/ButtonEvent") return PayloadKind::button;
    if (*type == "phone2act/RecorderCommand") return PayloadKind::recorder_command;
  }
  const std::string& base = topic.base();
  const std::string_view last = std::string_view(base).substr(base.rfind('/') + 1);
  if (last == "phone_pose") return PayloadKind::pose;
  if (last == "button") return PayloadKind::button;
  if (last == "recorder_control") return PayloadKind::recorder_command;
  return std::nullopt;
}

json encode_pose(const PoseSample& p) {
  return {{"header", {{"stamp", p.stamp_ms}, {"frame_id", p.frame_id}}},
          {"pose", {{"position", vec_json(p.position)}, {"orientation", quat_json(p.orientation)}}}};
}

json encode_button(const ButtonEvent& b) {
  return {{"button", to_string(b.button)}, {"stamp", b.stamp_ms}};
}

json encode_payload(const Payload& payload, Nanos stamp) {
  struct Visitor {
    Nanos stamp;
    json operator()(const PoseSample& p) const { return encode_pose(p); }
    json operator()(const ButtonEvent& b) const { return encode_button(b); }
    json operator()(const TargetPose& t) const {
      return {{"header", {{"stamp", stamp_json(t.stamp)}}},
              {"pose", {{"position", vec_json(t.position)}, {"orientation", quat_json(t.orientation)}}}};
    }
    json operator()(const GripperCommand& g) const {
      return {{"closed", g.closed}, {"stamp", stamp_json(g.stamp)}};
    }
    json operator()(const RobotState& s) const {
      return {{"header", {{"stamp", stamp_json(s.stamp)}}},
              {"pose",
               {{"position", vec_json(s.ee_position)}, {"orientation", quat_json(s.ee_orientation)}}},
              {"joints", s.joints},
              {"gripper_closed", s.gripper_closed}};
    }
    json operator()(const CameraFrame& f) const {
      return {{"source", f.source},
              {"index", f.index},
              {"width", f.image ? f.image->width : 0},
              {"height", f.image ? f.image->height : 0}};
    }
    json operator()(const HealthEvent& h) const {
      return {{"component", h.component},
              {"status", h.status == Health::ok ? "ok" : "degraded"},
              {"detail", h.detail}};
    }
    json operator()(const PlannerStatus& s) const {
      return {{"clutch_engaged", s.clutch_engaged},
              {"gripper_closed", s.gripper_closed},
              {"targets_emitted", s.targets_emitted},
              {"jumps_dropped", s.jumps_dropped}};
    }
    json operator()(const RecorderCommand& c) const {
      const char* names[] = {"start", "stop", "discard"};
      return {{"command", names[static_cast<int>(c.action)]}, {"task", c.task}};
    }
    json operator()(const RecorderStatus& s) const {
      const char* names[] = {"idle", "recording", "failed"};
      return {{"phase", names[static_cast<int>(s.phase)]},
              {"frames", s.frames},
              {"ticks_skipped", s.ticks_skipped},
              {"episodes_saved", s.episodes_saved},
              {"detail", s.detail}};
    }
    json operator()(const ConnectionEvent& c) const {
      return {{"connected", c.connected}, {"connection_id", c.connection_id}};
    }
  };
  json out = std::visit(Visitor{stamp}, payload);
  out["bus_stamp"] = stamp_json(stamp);
  return out;
}

std::string publish_frame(const std::string& topic, const json& msg) {
  return json{{"op", "publish"}, {"topic", topic}, {"msg", msg}}.dump();
}

std::string advertise_frame(const std::string& topic, std::string_view type) {
  return json{{"op", "advertise"}, {"topic", topic}, {"type", type}}.dump();
}

std::string subscribe_frame(const std::string& topic) {
  return json{{"op", "subscribe"}, {"topic", topic}}.dump();
}

std::string error_frame(std::string_view message, const std::optional<std::string>& id) {
  json j{{"op", "status"}, {"level", "error"}, {"msg", message}};
  if (id) j["id"] = *id;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace teleop::protocol
