#pragma once

#include <string>
#include <string_view>

#include "teleop/bus.hpp"

namespace teleop::topics {

inline constexpr std::string_view kPhonePose = "phone2act/phone_pose";
inline constexpr std::string_view kButton = "phone2act/button";
inline constexpr std::string_view kTargetPose = "phone2act/target_pose";
inline constexpr std::string_view kGripperCmd = "phone2act/gripper_cmd";
inline constexpr std::string_view kRobotFeedback = "phone2act/robot_feedback";
inline constexpr std::string_view kPlannerState = "phone2act/planner_state";
inline constexpr std::string_view kRecorderControl = "phone2act/recorder_control";
inline constexpr std::string_view kRecorderStatus = "phone2act/recorder_status";
inline constexpr std::string_view kConnection = "phone2act/connection";
inline constexpr std::string_view kBridgeHealth = "phone2act/bridge_health";
inline constexpr std::string_view kCameraPrefix = "phone2act/camera/";

inline TopicName camera(std::string_view ns, std::string_view source) {
  return TopicName(ns, std::string(kCameraPrefix) + std::string(source));
}

}  // namespace teleop::topics
