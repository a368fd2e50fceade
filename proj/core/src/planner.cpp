#include "teleop/planner.hpp"

#include <algorithm>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "teleop/topics.hpp"

namespace teleop {

void PlannerConfig::validate() const {
  if (!axis_map.valid()) throw std::invalid_argument("planner.axis_map: singular or bad scale");
  if (!workspace.x.valid()) throw std::invalid_argument("planner.workspace.x: need min < max");
  if (!workspace.y.valid()) throw std::invalid_argument("planner.workspace.y: need min < max");
  if (!workspace.z.valid()) throw std::invalid_argument("planner.workspace.z: need min < max");
  if (!(jump_threshold > 0.0)) throw std::invalid_argument("planner.jump_threshold: must be > 0");
  if (!(max_rotation_step > 0.0)) {
    throw std::invalid_argument("planner.max_rotation_step: must be > 0");
  }
  if (gripper_debounce < Nanos{0}) {
    throw std::invalid_argument("planner.gripper_debounce_ms: must be >= 0");
  }
}

Vec3 clamp_workspace(Vec3 p, const WorkspaceBounds& b) {
  return {std::clamp(p.x, b.x.min, b.x.max), std::clamp(p.y, b.y.min, b.y.max),
          std::clamp(p.z, b.z.min, b.z.max)};
}

FilterVerdict zero_jump_filter(Vec3 prev_accepted, Vec3 candidate, double threshold) {
  const double d = distance(prev_accepted, candidate);
  return d <= threshold ? FilterVerdict::accept : FilterVerdict::drop;
}

namespace {

PoseOrigin origin_of(Vec3 position, const Quat& q) {
  return {position, quat_to_rpy(q).rpy, q};
}

}  // namespace

Planner::Planner(PlannerConfig config) : config_(std::move(config)) { config_.validate(); }

Nanos Planner::next_stamp(Nanos now) {
  Nanos s = now;
  if (last_stamp_ && s <= *last_stamp_) s = *last_stamp_ + Nanos{1};
  last_stamp_ = s;
  return s;
}

std::vector<PlannerEffect> Planner::handle_button(const ButtonEvent& event, Nanos now) {
  std::vector<PlannerEffect> effects;
  if (event.button == Button::volume_down) {
    const bool bounced = last_gripper_press_ && now - *last_gripper_press_ < config_.gripper_debounce;
    last_gripper_press_ = now;
    if (bounced) return effects;
    gripper_closed_ = !gripper_closed_;
    effects.emplace_back(GripperCommand{gripper_closed_, next_stamp(now)});
    return effects;
  }

  if (clutch_.mode == ClutchMode::released) {
    clutch_.mode = ClutchMode::engaged;
    effects.emplace_back(ClutchChanged{ClutchMode::engaged});
    return effects;
  }

  if (!latest_feedback_) {
    effects.emplace_back(PlannerWarning{"clutch release refused: no robot feedback received yet"});
    return effects;
  }
  if (!latest_phone_) {
    effects.emplace_back(PlannerWarning{"clutch release refused: no phone pose received yet"});
    return effects;
  }
  clutch_.mode = ClutchMode::released;
  clutch_.phone_origin = origin_of(latest_phone_->position, latest_phone_->orientation);
  clutch_.robot_origin = origin_of(latest_feedback_->ee_position, latest_feedback_->ee_orientation);
  filter_reference_ = clutch_.robot_origin->position;
  last_rpy_ = clutch_.robot_origin->rpy;
  effects.emplace_back(ClutchChanged{ClutchMode::released});

  // Hold command at the captured feedback pose: the first target after a
  // release never jumps.
  TargetPose hold{clamp_workspace(clutch_.robot_origin->position, config_.workspace),
                  clutch_.robot_origin->orientation, next_stamp(now)};
  ++counters_.targets_emitted;
  effects.emplace_back(hold);
  return effects;
}

std::optional<TargetPose> Planner::process_pose(const PoseSample& sample, Nanos now) {
  if (!sample.position.finite()) {
    ++counters_.nonfinite_dropped;
    return std::nullopt;
  }
  latest_phone_ = sample;
  if (clutch_.mode == ClutchMode::engaged) return std::nullopt;

  const PoseOrigin& phone = *clutch_.phone_origin;
  const PoseOrigin& robot = *clutch_.robot_origin;

  const Vec3 dp = sample.position - phone.position;
  const Vec3 candidate = map_phone_delta(dp, config_.axis_map, robot.position);
  if (!candidate.finite()) {
    ++counters_.nonfinite_dropped;
    return std::nullopt;
  }
  if (zero_jump_filter(filter_reference_, candidate, config_.jump_threshold) ==
      FilterVerdict::drop) {
    ++counters_.jumps_dropped;
    return std::nullopt;
  }

  Quat orientation = robot.orientation;
  if (config_.rotation_enabled) {
    const Rpy delta = rotation_delta(phone.rpy, quat_to_rpy(sample.orientation).rpy);
    const Rpy wanted = wrap(Rpy{robot.rpy.roll + delta.roll, robot.rpy.pitch + delta.pitch,
                                robot.rpy.yaw + delta.yaw});
    Rpy step = rotation_delta(last_rpy_, wanted);
    const double lim = config_.max_rotation_step;
    const Rpy limited{std::clamp(step.roll, -lim, lim), std::clamp(step.pitch, -lim, lim),
                      std::clamp(step.yaw, -lim, lim)};
    if (!(limited == step)) ++counters_.rotation_steps_limited;
    const Rpy out = limited == step ? wanted
                                    : wrap(Rpy{last_rpy_.roll + limited.roll,
                                               last_rpy_.pitch + limited.pitch,
                                               last_rpy_.yaw + limited.yaw});
    last_rpy_ = out;
    if (!(out == robot.rpy)) orientation = rpy_to_quat(out);
  }

  filter_reference_ = candidate;
  ++counters_.targets_emitted;
  return TargetPose{clamp_workspace(candidate, config_.workspace), orientation, next_stamp(now)};
}

void Planner::on_feedback(const RobotState& state) { latest_feedback_ = state; }

std::vector<PlannerEffect> Planner::force_engage() {
  std::vector<PlannerEffect> effects;
  if (clutch_.mode == ClutchMode::released) {
    clutch_.mode = ClutchMode::engaged;
    effects.emplace_back(ClutchChanged{ClutchMode::engaged});
  }
  return effects;
}

PlannerNode::PlannerNode(Bus& bus, std::string ns, PlannerConfig config)
    : bus_(bus),
      ns_(normalize_namespace(ns)),
      planner_(std::move(config)),
      pose_sub_(bus.subscribe(TopicName(ns_, topics::kPhonePose), QosProfile::keep_last(64),
                              PayloadKind::pose)),
      button_sub_(bus.subscribe(TopicName(ns_, topics::kButton), QosProfile::keep_last(32),
                                PayloadKind::button)),
      feedback_sub_(bus.subscribe(TopicName(ns_, topics::kRobotFeedback),
                                  QosProfile::keep_last(8), PayloadKind::robot_state)),
      connection_sub_(bus.subscribe(TopicName(ns_, topics::kConnection), QosProfile::keep_last(8),
                                    PayloadKind::connection)),
      target_topic_(ns_, topics::kTargetPose),
      gripper_topic_(ns_, topics::kGripperCmd),
      status_topic_(ns_, topics::kPlannerState) {
  bus.advertise(target_topic_, PayloadKind::target);
  bus.advertise(gripper_topic_, PayloadKind::gripper);
  bus.advertise(status_topic_, PayloadKind::planner_status);
}

std::size_t PlannerNode::step() {
  std::vector<Envelope> batch;
  for (Subscription* s : {&pose_sub_, &button_sub_, &feedback_sub_, &connection_sub_}) {
    auto items = s->drain();
    std::move(items.begin(), items.end(), std::back_inserter(batch));
  }
  std::sort(batch.begin(), batch.end(),
            [](const Envelope& a, const Envelope& b) { return a.order < b.order; });

  for (const Envelope& e : batch) {
    switch (e.kind()) {
      case PayloadKind::pose:
        if (auto t = planner_.process_pose(e.get<PoseSample>(), e.publish_time)) {
          bus_.publish(target_topic_, *t);
        }
        break;
      case PayloadKind::button:
        apply(planner_.handle_button(e.get<ButtonEvent>(), e.publish_time));
        break;
      case PayloadKind::robot_state:
        planner_.on_feedback(e.get<RobotState>());
        break;
      case PayloadKind::connection:
        apply(planner_.force_engage());
        break;
      default:
        break;
    }
  }
  if (!status_published_) publish_status();
  return batch.size();
}

void PlannerNode::apply(const std::vector<PlannerEffect>& effects) {
  bool status_changed = false;
  for (const PlannerEffect& fx : effects) {
    if (const auto* t = std::get_if<TargetPose>(&fx)) {
      bus_.publish(target_topic_, *t);
    } else if (const auto* g = std::get_if<GripperCommand>(&fx)) {
      bus_.publish(gripper_topic_, *g);
      status_changed = true;
    } else if (std::holds_alternative<ClutchChanged>(fx)) {
      status_changed = true;
    } else if (const auto* w = std::get_if<PlannerWarning>(&fx)) {
      spdlog::warn("planner{}: {}", ns_.empty() ? "" : " " + ns_, w->message);
    }
  }
  if (status_changed) publish_status();
}

void PlannerNode::publish_status() {
  const auto& c = planner_.counters();
  bus_.publish(status_topic_,
               PlannerStatus{planner_.clutch().mode == ClutchMode::engaged,
                             planner_.gripper_closed(), c.targets_emitted, c.jumps_dropped});
  status_published_ = true;
}

}  // namespace teleop
