#include "teleop/orchestrator/replay.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace teleop {

namespace {

constexpr double kDeg = kPi / 180.0;

double parse_number(std::string_view tok, int line, std::string_view what) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ReplayParseError(line, fmt::format("{}: '{}' is not a number", what, tok));
  }
  return v;
}

ReplayPose parse_pose(const std::vector<std::string>& args, std::size_t from, int line) {
  const std::size_t n = args.size() - from;
  if (n != 3 && n != 6) throw ReplayParseError(line, "expected x y z [roll pitch yaw]");
  ReplayPose p;
  p.position = {parse_number(args[from], line, "x"), parse_number(args[from + 1], line, "y"),
                parse_number(args[from + 2], line, "z")};
  if (n == 6) {
    p.rpy = {parse_number(args[from + 3], line, "roll") * kDeg, parse_number(args[from + 4], line, "pitch") * kDeg,
             parse_number(args[from + 5], line, "yaw") * kDeg};
  }
  return p;
}

ReplayCommand parse_command(const std::string& name, const std::vector<std::string>& args, int line) {
  auto want = [&](std::size_t n) {
    if (args.size() != n) {
      throw ReplayParseError(line, fmt::format("{} takes {} argument{}", name, n, n == 1 ? "" : "s"));
    }
  };
  if (name == "pose") return parse_pose(args, 0, line);
  if (name == "ramp") {
    if (args.empty()) throw ReplayParseError(line, "ramp needs a duration");
    ReplayRamp r{parse_number(args[0], line, "duration"), parse_pose(args, 1, line)};
    if (!(r.duration > 0.0)) throw ReplayParseError(line, "ramp duration must be positive");
    return r;
  }
  if (name == "button") {
    want(1);
    if (args[0] == "volume_up") return ReplayButton{Button::volume_up};
    if (args[0] == "volume_down") return ReplayButton{Button::volume_down};
    throw ReplayParseError(line, fmt::format("unknown button '{}'", args[0]));
  }
  if (name == "record") {
    if (args.empty()) throw ReplayParseError(line, "record needs start, stop or discard");
    ReplayRecord r;
    if (args[0] == "start") {
      r.action = RecorderAction::start;
      for (std::size_t i = 1; i < args.size(); ++i) r.task += (i > 1 ? " " : "") + args[i];
      return r;
    }
    if (args.size() != 1) throw ReplayParseError(line, "only record start takes a task");
    if (args[0] == "stop") {
      r.action = RecorderAction::stop;
    } else if (args[0] == "discard") {
      r.action = RecorderAction::discard;
    } else {
      throw ReplayParseError(line, fmt::format("unknown record action '{}'", args[0]));
    }
    return r;
  }
  if (name == "rate") {
    want(1);
    const double hz = parse_number(args[0], line, "rate");
    if (!(hz > 0.0 && hz <= 1000.0)) throw ReplayParseError(line, "rate must be in (0, 1000] Hz");
    return ReplayRate{hz};
  }
  if (name == "noise") {
    want(1);
    const double s = parse_number(args[0], line, "noise");
    if (s < 0.0) throw ReplayParseError(line, "noise must not be negative");
    return ReplayNoise{s};
  }
  throw ReplayParseError(line, fmt::format("unknown command '{}'", name));
}

// Per-namespace operator state during playback.
struct Track {
  PhoneClient* phone = nullptr;
  std::optional<ReplayPose> pose;
  std::optional<ReplayPose> ramp_from;
  ReplayRamp ramp;
  double ramp_start = 0.0;
  double period = 1.0 / 50.0;
  double next_send = 0.0;
  double noise = 0.0;
  std::mt19937_64 rng;

  ReplayPose at(double t) const {
    if (!ramp_from) return *pose;
    const double a = std::clamp((t - ramp_start) / ramp.duration, 0.0, 1.0);
    const ReplayPose& f = *ramp_from;
    const ReplayPose& g = ramp.to;
    auto lerp = [a](double x, double y) { return x + a * (y - x); };
    return {{lerp(f.position.x, g.position.x), lerp(f.position.y, g.position.y), lerp(f.position.z, g.position.z)},
            {lerp(f.rpy.roll, g.rpy.roll), lerp(f.rpy.pitch, g.rpy.pitch), lerp(f.rpy.yaw, g.rpy.yaw)}};
  }
};

}  // namespace

ReplayParseError::ReplayParseError(int line, const std::string& message)
    : std::runtime_error(fmt::format("line {}: {}", line, message)), line_(line) {}

double ReplayScript::duration() const {
  if (end) return *end;
  return events.empty() ? 0.0 : events.back().t + 0.5;
}

std::vector<std::string> ReplayScript::namespaces() const {
  std::vector<std::string> out;
  for (const auto& e : events) {
    if (std::find(out.begin(), out.end(), e.ns) == out.end()) out.push_back(e.ns);
  }
  return out;
}

ReplayScript parse_replay(std::string_view text) {
  ReplayScript script;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  double last_t = 0.0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string w; ls >> w;) tok.push_back(w);
    if (tok.empty()) continue;
    if (script.end) throw ReplayParseError(line, "event after end");

    const double t = parse_number(tok[0], line, "time");
    if (t < 0.0) throw ReplayParseError(line, "time must not be negative");
    if (t < last_t) throw ReplayParseError(line, fmt::format("time {} is before the previous event ({})", t, last_t));
    last_t = t;

    std::size_t i = 1;
    std::string ns;
    if (i < tok.size() && tok[i].front() == '@') {
      ns = normalize_namespace(std::string_view(tok[i]).substr(1));
      ++i;
    }
    if (i >= tok.size()) throw ReplayParseError(line, "missing command");
    const std::string name = tok[i++];
    if (name == "end") {
      if (i != tok.size()) throw ReplayParseError(line, "end takes no arguments");
      script.end = t;
      continue;
    }
    const std::vector<std::string> args(tok.begin() + static_cast<std::ptrdiff_t>(i), tok.end());
    script.events.push_back({t, ns, parse_command(name, args, line), line});
  }
  return script;
}

ReplayScript load_replay(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open replay script {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_replay(ss.str());
}

ReplayResult replay_operator(const ReplayScript& script, System& sys, uint64_t seed) {
  Operator op(sys);
  std::map<std::string, Track> tracks;
  uint64_t salt = 0;
  for (const std::string& ns : script.namespaces()) {
    sys.arm(ns);  // throws for a namespace the profile does not run
    Track& tr = tracks[ns];
    tr.phone = &op.connect(ns, fmt::format("replay{}", ns.empty() ? "" : "-" + ns.substr(1)));
    tr.rng.seed(seed + 0x9E3779B97F4A7C15ull * ++salt);
  }

  const Nanos t0 = sys.clock().now();
  auto elapsed = [&] { return to_seconds(sys.clock().now() - t0); };
  const double duration = script.duration();
  const double half_tick = to_seconds(sys.profile().tick) / 2;
  std::size_t next_event = 0;

  for (;;) {
    const double t = elapsed();
    while (next_event < script.events.size() && script.events[next_event].t <= t + half_tick) {
      const ReplayEvent& ev = script.events[next_event++];
      Track& tr = tracks.at(ev.ns);
      std::visit(
          [&](const auto& c) {
            using C = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<C, ReplayPose>) {
              if (!tr.pose) tr.next_send = t;
              tr.pose = c;
              tr.ramp_from.reset();
            } else if constexpr (std::is_same_v<C, ReplayRamp>) {
              if (!tr.pose) throw ReplayParseError(ev.line, "ramp before any pose");
              tr.ramp_from = tr.at(t);
              tr.ramp = c;
              tr.ramp_start = t;
              tr.pose = c.to;
            } else if constexpr (std::is_same_v<C, ReplayButton>) {
              op.press(*tr.phone, c.button);
            } else if constexpr (std::is_same_v<C, ReplayRecord>) {
              op.record(*tr.phone, c.action, c.task);
            } else if constexpr (std::is_same_v<C, ReplayRate>) {
              tr.period = 1.0 / c.hz;
            } else if constexpr (std::is_same_v<C, ReplayNoise>) {
              tr.noise = c.stddev;
            }
          },
          ev.command);
    }
    for (auto& [ns, tr] : tracks) {
      if (!tr.pose || t + half_tick < tr.next_send) continue;
      ReplayPose p = tr.at(t);
      if (tr.ramp_from && t >= tr.ramp_start + tr.ramp.duration) tr.ramp_from.reset();
      if (tr.noise > 0.0) {
        std::normal_distribution<double> n(0.0, tr.noise);
        p.position = p.position + Vec3{n(tr.rng), n(tr.rng), n(tr.rng)};
      }
      op.pose(*tr.phone, p.position, p.rpy);
      while (tr.next_send <= t + half_tick) tr.next_send += tr.period;
    }
    if (t + half_tick >= duration) break;
    sys.wait(sys.profile().tick);
  }

  ReplayResult result;
  for (auto& [ns, tr] : tracks) {
    result.frames_sent += tr.phone->frames_sent();
    tr.phone->close();
  }
  // Let the recorders act on a trailing stop.
  sys.wait(std::chrono::milliseconds(100));
  result.duration_s = elapsed();
  for (auto& [ns, tr] : tracks) {
    const RecorderNode& rec = *sys.arm(ns).recorder;
    result.exports[ns] = rec.exports();
    if (auto err = rec.last_error(); !err.empty()) result.recorder_errors[ns] = err;
  }
  return result;
}

}  // namespace teleop
