#include "teleop/orchestrator/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "teleop/bus.hpp"

namespace teleop {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads fields out of one TOML table, remembering which keys it consumed so
// leftovers can be reported as unknown.
class Fields {
 public:
  Fields(const json& table, std::string path) : table_(table), path_(std::move(path)) {
    if (!table_.is_object()) fail("", "expected a table");
  }

  [[noreturn]] void fail(std::string_view key, std::string_view msg) const {
    throw ConfigError(fmt::format("{}: {}", name(key), msg));
  }

  std::string name(std::string_view key) const {
    if (key.empty()) return path_.empty() ? std::string("<root>") : path_;
    return path_.empty() ? std::string(key) : fmt::format("{}.{}", path_, key);
  }

  const json* get(std::string_view key) {
    const auto it = table_.find(std::string(key));
    if (it == table_.end()) return nullptr;
    seen_.insert(std::string(key));
    return &*it;
  }

  void number(std::string_view key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(key, "must be finite");
    }
  }

  template <typename Int>
  void integer(std::string_view key, Int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) fail(key, "expected an integer");
      const int64_t raw = v->get<int64_t>();
      if (raw < 0 || static_cast<uint64_t>(raw) > static_cast<uint64_t>(std::numeric_limits<Int>::max())) {
        fail(key, "out of range");
      }
      out = static_cast<Int>(raw);
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) fail(key, "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(std::string_view key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }

  void path(std::string_view key, fs::path& out) {
    std::string s = out.string();
    string(key, s);
    out = s;
  }

  // Durations are written in milliseconds, fractions allowed.
  template <typename Duration>
  void millis(std::string_view key, Duration& out) {
    double ms = std::chrono::duration<double, std::milli>(out).count();
    number(key, ms);
    if (ms < 0) fail(key, "must not be negative");
    out = std::chrono::duration_cast<Duration>(std::chrono::duration<double, std::milli>(ms));
  }

  void interval(std::string_view key, Interval& out) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        fail(key, "expected [min, max]");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
      if (!out.valid()) fail(key, "needs finite min < max");
    }
  }

  void vec3(std::string_view key, double& a, double& b, double& c) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 3) fail(key, "expected three numbers");
      for (const auto& e : *v) {
        if (!e.is_number()) fail(key, "expected three numbers");
      }
      a = (*v)[0].get<double>();
      b = (*v)[1].get<double>();
      c = (*v)[2].get<double>();
    }
  }

  // A table's sub-table; missing means defaults.
  std::optional<Fields> table(std::string_view key) {
    if (const json* v = get(key)) {
      if (!v->is_object()) fail(key, "expected a table");
      return Fields(*v, name(key));
    }
    return std::nullopt;
  }

  void finish() const {
    for (const auto& [k, v] : table_.items()) {
      if (!seen_.count(k)) fail(k, "unknown key");
    }
  }

 private:
  const json& table_;
  std::string path_;
  std::set<std::string> seen_;
};

// Library validators throw std::invalid_argument; give them the field prefix.
template <typename F>
void checked(const std::string& where, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
}

void read_axis_map(Fields& f, AxisMap& map) {
  if (const json* v = f.get("axis_map")) {
    if (v->is_string()) {
      checked(f.name("axis_map"), [&] { map = AxisMap::preset(v->get<std::string>(), map.scale); });
    } else if (v->is_array() && v->size() == 9) {
      for (std::size_t i = 0; i < 9; ++i) {
        if (!(*v)[i].is_number()) f.fail("axis_map", "matrix entries must be numbers");
        map.m[i / 3][i % 3] = (*v)[i].get<double>();
      }
    } else {
      f.fail("axis_map", "expected \"identity\", \"landscape\" or nine numbers (row-major)");
    }
  }
  f.number("scale", map.scale);
  if (!map.valid()) f.fail("axis_map", "matrix must be full rank with a positive scale");
}

std::vector<CameraConfig> default_cameras() {
  CameraConfig front;
  front.name = "cam_front";
  front.view = "front";
  CameraConfig top;
  top.name = "cam_top";
  top.view = "top";
  return {front, top};
}

void read_camera(Fields f, CameraConfig& c) {
  f.string("name", c.name);
  f.integer("width", c.width);
  f.integer("height", c.height);
  f.number("rate_hz", c.rate_hz);
  std::string producer = c.producer == CameraProducer::synthetic ? "synthetic" : "image_sequence";
  f.string("producer", producer);
  if (producer == "synthetic") {
    c.producer = CameraProducer::synthetic;
  } else if (producer == "image_sequence") {
    c.producer = CameraProducer::image_sequence;
  } else {
    f.fail("producer", "expected synthetic or image_sequence");
  }
  f.string("view", c.view);
  f.path("directory", c.directory);
  f.finish();
}

ArmProfile read_arm(Fields f, uint64_t seed) {
  ArmProfile arm;
  std::string ns;
  f.string("namespace", ns);
  arm.ns = normalize_namespace(ns);
  f.string("controller_address", arm.controller_address);
  f.integer("controller_port", arm.controller_port);

  if (auto p = f.table("planner")) {
    read_axis_map(*p, arm.planner.axis_map);
    p->number("jump_threshold", arm.planner.jump_threshold);
    p->boolean("rotation_enabled", arm.planner.rotation_enabled);
    p->number("max_rotation_step", arm.planner.max_rotation_step);
    p->millis("gripper_debounce_ms", arm.planner.gripper_debounce);
    p->interval("workspace_x", arm.planner.workspace.x);
    p->interval("workspace_y", arm.planner.workspace.y);
    p->interval("workspace_z", arm.planner.workspace.z);
    p->finish();
    checked(f.name("planner"), [&] { arm.planner.validate(); });
  }
  if (auto s = f.table("sim")) {
    s->number("lag_time_constant", arm.sim.lag_time_constant);
    s->number("transport_delay", arm.sim.transport_delay);
    s->number("max_cartesian_speed", arm.sim.max_cartesian_speed);
    s->number("feedback_rate", arm.sim.feedback_rate);
    s->vec3("home_position", arm.sim.home_position.x, arm.sim.home_position.y, arm.sim.home_position.z);
    s->vec3("home_rpy", arm.sim.home_rpy.roll, arm.sim.home_rpy.pitch, arm.sim.home_rpy.yaw);
    s->finish();
    checked(f.name("sim"), [&] { arm.sim.validate(); });
  }
  if (auto b = f.table("bridge")) {
    b->number("feedback_rate", arm.bridge.feedback_rate);
    b->millis("initial_backoff_ms", arm.bridge.initial_backoff);
    b->millis("max_backoff_ms", arm.bridge.max_backoff);
    b->finish();
  }
  arm.bridge.kinematics = arm.sim;

  if (const json* cams = f.get("camera")) {
    if (!cams->is_array()) f.fail("camera", "expected [[arm.camera]] tables");
    arm.cameras.clear();
    for (std::size_t i = 0; i < cams->size(); ++i) {
      CameraConfig c;
      c.seed = seed;
      const std::string where = fmt::format("{}[{}]", f.name("camera"), i);
      read_camera(Fields((*cams)[i], where), c);
      checked(where, [&] { c.validate(); });
      arm.cameras.push_back(std::move(c));
    }
  } else {
    arm.cameras = default_cameras();
    for (auto& c : arm.cameras) c.seed = seed;
  }
  f.finish();
  return arm;
}

ArmProfile default_arm(std::string ns) {
  ArmProfile a;
  a.ns = normalize_namespace(ns);
  a.cameras = default_cameras();
  return a;
}

// Shortest text that reads back to the same double.
std::string num(double v) {
  std::string s = fmt::format("{}", v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string ms(Nanos d) { return num(std::chrono::duration<double, std::milli>(d).count()); }

std::string toml_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string interval(const Interval& i) { return fmt::format("[{}, {}]", num(i.min), num(i.max)); }

}  // namespace

void LaunchProfile::validate() const {
  if (tick <= Nanos{0}) throw ConfigError("tick_ms: must be positive");
  if (arms.empty()) throw ConfigError("arm: at least one arm is required");
  checked("recorder", [&] { recorder_config(arms.front()).validate(); });
  std::set<std::string> seen;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const auto& a = arms[i];
    const std::string where = fmt::format("arm[{}]", i);
    if (a.ns != normalize_namespace(a.ns)) {
      throw ConfigError(fmt::format("{}.namespace: '{}' is not normalized", where, a.ns));
    }
    if (a.ns.find("phone2act") != std::string::npos) {
      throw ConfigError(fmt::format("{}.namespace: must not contain 'phone2act'", where));
    }
    if (!seen.insert(a.ns).second) {
      throw ConfigError(fmt::format("{}.namespace: '{}' is used by another arm", where,
                                    a.ns.empty() ? "/" : a.ns));
    }
    if (a.cameras.empty()) throw ConfigError(where + ".camera: at least one camera is required");
    std::set<std::string> names;
    for (std::size_t k = 0; k < a.cameras.size(); ++k) {
      const std::string cw = fmt::format("{}.camera[{}]", where, k);
      checked(cw, [&] { a.cameras[k].validate(); });
      if (!names.insert(a.cameras[k].name).second) {
        throw ConfigError(fmt::format("{}.name: duplicate camera '{}'", cw, a.cameras[k].name));
      }
    }
    checked(where + ".planner", [&] { a.planner.validate(); });
    checked(where + ".sim", [&] { a.sim.validate(); });
    if (!(a.bridge.feedback_rate > 0.0)) throw ConfigError(where + ".bridge.feedback_rate: must be positive");
    if (a.bridge.initial_backoff <= Nanos{0} || a.bridge.max_backoff < a.bridge.initial_backoff) {
      throw ConfigError(where + ".bridge: need 0 < initial_backoff_ms <= max_backoff_ms");
    }
  }
  // Two arms sharing one fixed controller port would collide at startup.
  std::set<uint16_t> ports;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const uint16_t p = arms[i].controller_port;
    if (p != 0 && !ports.insert(p).second) {
      throw ConfigError(fmt::format("arm[{}].controller_port: {} is used by another arm", i, p));
    }
  }
}

fs::path LaunchProfile::output_root(const ArmProfile& a) const {
  if (a.ns.empty()) return recorder.output_root;
  std::string leaf = a.ns.substr(1);
  for (char& c : leaf) {
    if (c == '/') c = '_';
  }
  return recorder.output_root / leaf;
}

RecorderConfig LaunchProfile::recorder_config(const ArmProfile& a) const {
  RecorderConfig rc;
  rc.cameras.clear();
  for (const auto& c : a.cameras) rc.cameras.push_back(c.name);
  rc.freshness_window = recorder.freshness_window;
  rc.memory_ceiling_bytes = recorder.memory_ceiling_mb * (std::size_t{1} << 20);
  rc.default_task = recorder.task;
  rc.auto_export = recorder.auto_export;
  rc.export_config.root = output_root(a);
  rc.export_config.video = recorder.video;
  return rc;
}

const ArmProfile& LaunchProfile::arm(std::string_view ns) const {
  const std::string key = normalize_namespace(ns);
  for (const auto& a : arms) {
    if (a.ns == key) return a;
  }
  throw ConfigError(fmt::format("no arm with namespace '{}'", ns));
}

LaunchProfile LaunchProfile::single_arm() {
  LaunchProfile p;
  p.arms.push_back(default_arm(""));
  return p;
}

LaunchProfile LaunchProfile::bimanual() {
  LaunchProfile p;
  p.arms.push_back(default_arm("/left"));
  p.arms.push_back(default_arm("/right"));
  // Mirror the right arm's workspace so the two do not overlap in y.
  p.arms[0].planner.workspace.y = {0.0, 0.30};
  p.arms[1].planner.workspace.y = {-0.30, 0.0};
  p.arms[0].sim.home_position = {0.40, 0.15, 0.25};
  p.arms[1].sim.home_position = {0.40, -0.15, 0.25};
  for (auto& a : p.arms) a.bridge.kinematics = a.sim;
  return p;
}

LaunchProfile parse_profile(std::string_view text) {
  const json doc = parse_toml(text);
  Fields root(doc, "");
  LaunchProfile p;

  std::string clock = "virtual";
  root.string("clock", clock);
  if (clock == "virtual") {
    p.clock = ClockMode::virtual_time;
  } else if (clock == "wall") {
    p.clock = ClockMode::wall;
  } else {
    root.fail("clock", "expected \"virtual\" or \"wall\"");
  }
  root.integer("seed", p.seed);
  root.millis("tick_ms", p.tick);

  if (auto g = root.table("gateway")) {
    g->string("bind_address", p.gateway.bind_address);
    g->integer("port", p.gateway.port);
    g->millis("nominal_pose_period_ms", p.gateway.nominal_pose_period);
    g->integer("rate_window", p.gateway.rate_window);
    g->millis("forward_interval_ms", p.gateway.forward_interval);
    g->integer("max_frame_bytes", p.gateway.max_frame_bytes);
    g->finish();
    if (p.gateway.rate_window < 2) g->fail("rate_window", "must be at least 2");
    if (p.gateway.max_frame_bytes < 256) g->fail("max_frame_bytes", "must be at least 256");
  }

  if (auto r = root.table("recorder")) {
    r->path("output_root", p.recorder.output_root);
    std::string mode(to_string(p.recorder.video.mode));
    r->string("video_mode", mode);
    checked(r->name("video_mode"), [&] { p.recorder.video.mode = parse_video_mode(mode); });
    r->string("codec", p.recorder.video.codec);
    if (p.recorder.video.codec.size() != 4) r->fail("codec", "must be a four-character code");
    r->millis("freshness_window_ms", p.recorder.freshness_window);
    r->integer("memory_ceiling_mb", p.recorder.memory_ceiling_mb);
    r->string("task", p.recorder.task);
    r->boolean("auto_export", p.recorder.auto_export);
    r->finish();
  }

  if (const json* arms = root.get("arm")) {
    if (!arms->is_array()) root.fail("arm", "expected [[arm]] tables");
    for (std::size_t i = 0; i < arms->size(); ++i) {
      p.arms.push_back(read_arm(Fields((*arms)[i], fmt::format("arm[{}]", i)), p.seed));
    }
  } else {
    p.arms.push_back(default_arm(""));
    for (auto& c : p.arms.back().cameras) c.seed = p.seed;
  }
  root.finish();
  p.validate();
  return p;
}

LaunchProfile load_profile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_profile(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string to_toml(const LaunchProfile& p) {
  std::string o;
  auto line = [&o](std::string_view k, const std::string& v) { o += fmt::format("{} = {}\n", k, v); };

  line("clock", toml_string(p.clock == ClockMode::wall ? "wall" : "virtual"));
  line("seed", std::to_string(p.seed));
  line("tick_ms", ms(p.tick));

  o += "\n[gateway]\n";
  line("bind_address", toml_string(p.gateway.bind_address));
  line("port", std::to_string(p.gateway.port));
  line("nominal_pose_period_ms", ms(p.gateway.nominal_pose_period));
  line("rate_window", std::to_string(p.gateway.rate_window));
  line("forward_interval_ms", ms(p.gateway.forward_interval));
  line("max_frame_bytes", std::to_string(p.gateway.max_frame_bytes));

  o += "\n[recorder]\n";
  line("output_root", toml_string(p.recorder.output_root.string()));
  line("video_mode", toml_string(to_string(p.recorder.video.mode)));
  line("codec", toml_string(p.recorder.video.codec));
  line("freshness_window_ms", ms(p.recorder.freshness_window));
  line("memory_ceiling_mb", std::to_string(p.recorder.memory_ceiling_mb));
  line("task", toml_string(p.recorder.task));
  line("auto_export", p.recorder.auto_export ? "true" : "false");

  for (const auto& a : p.arms) {
    o += "\n[[arm]]\n";
    line("namespace", toml_string(a.ns));
    line("controller_address", toml_string(a.controller_address));
    line("controller_port", std::to_string(a.controller_port));

    o += "\n[arm.planner]\n";
    std::string m = "[";
    for (std::size_t i = 0; i < 9; ++i) {
      m += num(a.planner.axis_map.m[i / 3][i % 3]);
      m += i == 8 ? "]" : ", ";
    }
    line("axis_map", m);
    line("scale", num(a.planner.axis_map.scale));
    line("jump_threshold", num(a.planner.jump_threshold));
    line("rotation_enabled", a.planner.rotation_enabled ? "true" : "false");
    line("max_rotation_step", num(a.planner.max_rotation_step));
    line("gripper_debounce_ms", ms(a.planner.gripper_debounce));
    line("workspace_x", interval(a.planner.workspace.x));
    line("workspace_y", interval(a.planner.workspace.y));
    line("workspace_z", interval(a.planner.workspace.z));

    o += "\n[arm.sim]\n";
    line("lag_time_constant", num(a.sim.lag_time_constant));
    line("transport_delay", num(a.sim.transport_delay));
    line("max_cartesian_speed", num(a.sim.max_cartesian_speed));
    line("feedback_rate", num(a.sim.feedback_rate));
    const auto& hp = a.sim.home_position;
    line("home_position", fmt::format("[{}, {}, {}]", num(hp.x), num(hp.y), num(hp.z)));
    const auto& hr = a.sim.home_rpy;
    line("home_rpy", fmt::format("[{}, {}, {}]", num(hr.roll), num(hr.pitch), num(hr.yaw)));

    o += "\n[arm.bridge]\n";
    line("feedback_rate", num(a.bridge.feedback_rate));
    line("initial_backoff_ms", ms(a.bridge.initial_backoff));
    line("max_backoff_ms", ms(a.bridge.max_backoff));

    for (const auto& c : a.cameras) {
      o += "\n[[arm.camera]]\n";
      line("name", toml_string(c.name));
      line("width", std::to_string(c.width));
      line("height", std::to_string(c.height));
      line("rate_hz", num(c.rate_hz));
      line("producer", toml_string(c.producer == CameraProducer::synthetic ? "synthetic" : "image_sequence"));
      line("view", toml_string(c.view));
      if (!c.directory.empty()) line("directory", toml_string(c.directory.string()));
    }
  }
  return o;
}

}  // namespace teleop
