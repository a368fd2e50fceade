#include "teleop/robot/sim_arm.hpp"

#include <algorithm>
#include <stdexcept>

namespace teleop::robot {

void SimArmConfig::validate() const {
  if (!(lag_time_constant >= 0.0)) throw std::invalid_argument("sim.lag_time_constant: must be >= 0");
  if (!(transport_delay >= 0.0)) throw std::invalid_argument("sim.transport_delay: must be >= 0");
  if (!(max_cartesian_speed > 0.0)) throw std::invalid_argument("sim.max_cartesian_speed: must be > 0");
  if (!(feedback_rate > 0.0)) throw std::invalid_argument("sim.feedback_rate: must be > 0");
  if (!(substep > 0.0)) throw std::invalid_argument("sim.substep: must be > 0");
  for (const auto& l : joint_limits) {
    if (!l.valid()) throw std::invalid_argument("sim.joint_limits: need min < max");
  }
  if (!(links.upper_arm > 0.0 && links.forearm > 0.0)) {
    throw std::invalid_argument("sim.link_lengths: must be > 0");
  }
}

std::array<double, 6> placeholder_joints(Vec3 p, const Quat& q, const SimArmConfig& cfg) {
  const double l1 = cfg.links.upper_arm;
  const double l2 = cfg.links.forearm;
  const double base = std::atan2(p.y, p.x);
  const double r = std::hypot(p.x, p.y);
  const double h = p.z - cfg.links.base_height;
  const double lo = std::abs(l1 - l2) + 1e-9;
  const double hi = l1 + l2 - 1e-9;
  const double d = std::clamp(std::hypot(r, h), lo, hi);
  const double cos_elbow = std::clamp((d * d - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  const double elbow = -std::acos(cos_elbow);
  const double shoulder = std::atan2(h, r) - std::atan2(l2 * std::sin(elbow), l1 + l2 * std::cos(elbow));
  const Rpy rpy = quat_to_rpy(q).rpy;

  std::array<double, 6> j{base, shoulder, elbow, rpy.roll, rpy.pitch, wrap_angle(rpy.yaw - base)};
  for (std::size_t i = 0; i < j.size(); ++i) {
    j[i] = std::clamp(j[i], cfg.joint_limits[i].min, cfg.joint_limits[i].max);
  }
  return j;
}

RobotState sim_step(const RobotState& state, const TargetPose& command, double dt,
                    const SimArmConfig& config) {
  const double tau = config.lag_time_constant;
  const double alpha = tau > 0.0 ? 1.0 - std::exp(-dt / tau) : 1.0;

  RobotState next = state;
  Vec3 move = (command.position - state.ee_position) * alpha;
  const double cap = config.max_cartesian_speed * dt;
  const double len = move.norm();
  if (len > cap) move = move * (cap / len);
  next.ee_position = state.ee_position + move;

  if (!(command.orientation == state.ee_orientation)) {
    next.ee_orientation = slerp(state.ee_orientation, command.orientation, alpha);
  }
  if (!(next.ee_position == state.ee_position) || !(next.ee_orientation == state.ee_orientation)) {
    next.joints = placeholder_joints(next.ee_position, next.ee_orientation, config);
  }
  next.stamp = state.stamp + from_seconds(dt);
  return next;
}

SimArm::SimArm(SimArmConfig config, Nanos start)
    : config_(std::move(config)), sim_time_(start), substep_(from_seconds(config_.substep)) {
  config_.validate();
  state_.ee_position = config_.home_position;
  state_.ee_orientation = rpy_to_quat(config_.home_rpy);
  state_.joints = placeholder_joints(state_.ee_position, state_.ee_orientation, config_);
  state_.stamp = start;
  current_command_ = TargetPose{state_.ee_position, state_.ee_orientation, start};
}

void SimArm::command(const TargetPose& target, Nanos received) {
  pending_.push_back({target, received + from_seconds(config_.transport_delay)});
}

void SimArm::set_gripper(bool closed) { state_.gripper_closed = closed; }

const RobotState& SimArm::advance_to(Nanos t) {
  const double dt = std::chrono::duration<double>(substep_).count();
  while (sim_time_ + substep_ <= t) {
    while (!pending_.empty() && pending_.front().active_at <= sim_time_) {
      current_command_ = pending_.front().target;
      pending_.pop_front();
    }
    state_ = sim_step(state_, current_command_, dt, config_);
    sim_time_ += substep_;
    state_.stamp = sim_time_;
  }
  return state_;
}

}  // namespace teleop::robot
