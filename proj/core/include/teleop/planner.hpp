#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "teleop/bus.hpp"
#include "teleop/clock.hpp"
#include "teleop/messages.hpp"
#include "teleop/pose_math.hpp"

namespace teleop {

struct Interval {
  double min = 0.0;
  double max = 0.0;
  bool valid() const { return std::isfinite(min) && std::isfinite(max) && min < max; }
  bool contains(double v) const { return v >= min && v <= max; }
};

struct WorkspaceBounds {
  Interval x{0.20, 0.60};
  Interval y{-0.30, 0.30};
  Interval z{0.05, 0.45};

  bool valid() const { return x.valid() && y.valid() && z.valid(); }
  bool contains(Vec3 p) const { return x.contains(p.x) && y.contains(p.y) && z.contains(p.z); }
};

struct PlannerConfig {
  AxisMap axis_map = AxisMap::landscape();
  WorkspaceBounds workspace;
  double jump_threshold = 0.060;  // meters
  bool rotation_enabled = true;
  double max_rotation_step = 0.35;  // radians per accepted sample, per axis
  Nanos gripper_debounce = std::chrono::milliseconds(150);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

Vec3 clamp_workspace(Vec3 p, const WorkspaceBounds& b);

enum class FilterVerdict { accept, drop };

/// Accepts when the Euclidean distance is at most threshold.
FilterVerdict zero_jump_filter(Vec3 prev_accepted, Vec3 candidate, double threshold);

enum class ClutchMode { engaged, released };

struct PoseOrigin {
  Vec3 position;
  Rpy rpy;
  Quat orientation;
};

struct ClutchState {
  ClutchMode mode = ClutchMode::engaged;
  std::optional<PoseOrigin> phone_origin;
  std::optional<PoseOrigin> robot_origin;
};

struct ClutchChanged {
  ClutchMode mode;
};
struct PlannerWarning {
  std::string message;
};

using PlannerEffect = std::variant<ClutchChanged, TargetPose, GripperCommand, PlannerWarning>;

struct PlannerCounters {
  uint64_t targets_emitted = 0;
  uint64_t jumps_dropped = 0;
  uint64_t nonfinite_dropped = 0;
  uint64_t rotation_steps_limited = 0;
};

/// Clutch, frame alignment, zero-jump filtering and workspace clamping for
/// a single arm. Starts engaged; nothing is emitted until a release that
/// has robot feedback to anchor on.
class Planner {
 public:
  explicit Planner(PlannerConfig config);

  std::vector<PlannerEffect> handle_button(const ButtonEvent& event, Nanos now);
  std::optional<TargetPose> process_pose(const PoseSample& sample, Nanos now);
  void on_feedback(const RobotState& state);
  /// Safe hold, used when the phone connection is lost or replaced.
  std::vector<PlannerEffect> force_engage();

  const ClutchState& clutch() const { return clutch_; }
  bool gripper_closed() const { return gripper_closed_; }
  const PlannerCounters& counters() const { return counters_; }
  const PlannerConfig& config() const { return config_; }

 private:
  Nanos next_stamp(Nanos now);

  PlannerConfig config_;
  ClutchState clutch_;
  std::optional<PoseSample> latest_phone_;
  std::optional<RobotState> latest_feedback_;
  Vec3 filter_reference_;
  Rpy last_rpy_;
  bool gripper_closed_ = false;
  std::optional<Nanos> last_gripper_press_;
  std::optional<Nanos> last_stamp_;
  PlannerCounters counters_;
};

/// Binds a Planner to one namespace on the bus. step() consumes pending
/// pose, button, feedback and connection envelopes in bus order.
class PlannerNode {
 public:
  PlannerNode(Bus& bus, std::string ns, PlannerConfig config);

  /// Returns the number of envelopes consumed.
  std::size_t step();

  const Planner& planner() const { return planner_; }
  const std::string& ns() const { return ns_; }

 private:
  void apply(const std::vector<PlannerEffect>& effects);
  void publish_status();

  Bus& bus_;
  std::string ns_;
  Planner planner_;
  Subscription pose_sub_;
  Subscription button_sub_;
  Subscription feedback_sub_;
  Subscription connection_sub_;
  TopicName target_topic_;
  TopicName gripper_topic_;
  TopicName status_topic_;
  bool status_published_ = false;
};

}  // namespace teleop
