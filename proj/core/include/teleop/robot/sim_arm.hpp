#pragma once

#include <array>
#include <deque>

#include "teleop/clock.hpp"
#include "teleop/messages.hpp"
#include "teleop/planner.hpp"

namespace teleop::robot {

/// Stand-in geometry for joint readouts: a base yaw joint on a pedestal,
/// a two-link planar shoulder/elbow chain, and a spherical wrist.
struct ArmGeometry {
  double base_height = 0.15;
  double upper_arm = 0.35;
  double forearm = 0.35;
};

struct SimArmConfig {
  double lag_time_constant = 0.25;   // seconds, first-order smoothing
  double transport_delay = 0.020;    // seconds from receipt to actuation
  double max_cartesian_speed = 0.5;  // m/s
  double feedback_rate = 100.0;      // Hz
  double substep = 0.001;            // seconds, integration step
  std::array<Interval, 6> joint_limits{{{-kPi, kPi}, {-kPi, kPi}, {-kPi, kPi},
                                        {-kPi, kPi}, {-kPi, kPi}, {-kPi, kPi}}};
  ArmGeometry links;
  Vec3 home_position{0.40, 0.0, 0.25};
  Rpy home_rpy{kPi, 0.0, 0.0};  // tool pointing down

  void validate() const;
};

/// Joint readout for an end-effector pose:
///   j0 base yaw = atan2(y, x)
///   j1, j2 shoulder/elbow from planar two-link IK (elbow up) on
///          (hypot(x, y), z - base_height), reach clamped to the annulus
///   j3..j5 = roll, pitch, wrap(yaw - j0)
/// Each joint is then clamped into its limit.
std::array<double, 6> placeholder_joints(Vec3 position, const Quat& orientation,
                                         const SimArmConfig& config);

/// One integration step: position moves toward the command by
/// (1 - exp(-dt/tau)) of the gap, capped at max_cartesian_speed * dt;
/// orientation slerps by the same fraction. Deterministic.
RobotState sim_step(const RobotState& state, const TargetPose& command, double dt,
                    const SimArmConfig& config);

/// Simulated arm with transport delay, advanced lazily in fixed substeps
/// so the trajectory depends only on command receipt times.
class SimArm {
 public:
  SimArm(SimArmConfig config, Nanos start);

  void command(const TargetPose& target, Nanos received);
  void set_gripper(bool closed);
  const RobotState& advance_to(Nanos t);

  const RobotState& state() const { return state_; }
  const SimArmConfig& config() const { return config_; }
  Nanos sim_time() const { return sim_time_; }

 private:
  struct Pending {
    TargetPose target;
    Nanos active_at;
  };

  SimArmConfig config_;
  RobotState state_;
  TargetPose current_command_;
  std::deque<Pending> pending_;
  Nanos sim_time_;
  Nanos substep_;
};

}  // namespace teleop::robot
