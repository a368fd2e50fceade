#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "teleop/orchestrator/system.hpp"

namespace teleop {

// Scripted operator. One event per line, times in seconds from the start
// of the replay, non-decreasing:
//
//   <t> [@ns] pose x y z [roll pitch yaw]      jump the phone pose (m, deg)
//   <t> [@ns] ramp dur x y z [roll pitch yaw]  move linearly over dur s
//   <t> [@ns] button volume_up|volume_down
//   <t> [@ns] record start [task...] | record stop | record discard
//   <t> [@ns] rate hz                          pose stream rate (default 50)
//   <t> [@ns] noise std                        gaussian position noise (m)
//   <t> end                                    stop the replay here
//
// '#' starts a comment. Each namespace gets its own phone client, which
// streams its current pose at the configured rate once it has one.

struct ReplayPose {
  Vec3 position;
  Rpy rpy;  // radians
};
struct ReplayRamp {
  double duration = 0.0;
  ReplayPose to;
};
struct ReplayButton {
  Button button = Button::volume_up;
};
struct ReplayRecord {
  RecorderAction action = RecorderAction::start;
  std::string task;
};
struct ReplayRate {
  double hz = 50.0;
};
struct ReplayNoise {
  double stddev = 0.0;
};

using ReplayCommand = std::variant<ReplayPose, ReplayRamp, ReplayButton, ReplayRecord, ReplayRate, ReplayNoise>;

struct ReplayEvent {
  double t = 0.0;
  std::string ns;
  ReplayCommand command;
  int line = 0;
};

struct ReplayScript {
  std::vector<ReplayEvent> events;
  std::optional<double> end;  // from an explicit `end` line

  /// Explicit end, else half a second after the last event.
  double duration() const;
  std::vector<std::string> namespaces() const;
};

class ReplayParseError : public std::runtime_error {
 public:
  ReplayParseError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

ReplayScript parse_replay(std::string_view text);
ReplayScript load_replay(const std::filesystem::path& path);

struct ReplayResult {
  std::map<std::string, std::vector<ManifestDelta>> exports;  // by namespace
  std::map<std::string, std::string> recorder_errors;         // last error, if any
  uint64_t frames_sent = 0;
  double duration_s = 0.0;
};

/// Plays the script through real WebSocket clients against a started
/// System. Noise draws come from `seed`, so on the virtual clock the same
/// (profile, script, seed) always yields the same dataset.
ReplayResult replay_operator(const ReplayScript& script, System& system, uint64_t seed);

}  // namespace teleop
