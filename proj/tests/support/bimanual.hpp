#pragma once

// Two scripted phones driving the bimanual profile, with taps on both
// namespaces so every command can be traced to where it landed.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "support.hpp"
#include "teleop/orchestrator/system.hpp"
#include "teleop/recorder/dataset.hpp"
#include "teleop/robot/wire.hpp"
#include "teleop/topics.hpp"

namespace teleop::test {

struct BimanualRun {
  uint64_t commands = 0;
  // A command counts as leaked when it shows up anywhere but its own
  // namespace: a pose/button tap entry from the wrong client, a count that
  // disagrees with what that client sent, or a controller MOVL that does
  // not match the same namespace's target with that sequence number.
  uint64_t leakage = 0;
  std::map<std::string, uint64_t> poses_sent, buttons_sent, movl_received, movl_checked;
  std::map<std::string, dataset::ValidationReport> reports;
  std::map<std::string, std::size_t> episodes;
};

inline BimanualRun run_bimanual(std::size_t n_commands, const std::filesystem::path& root, uint64_t seed) {
  System sys(test_profile(true, root, VideoMode::image_sequence, seed));
  sys.start();
  Operator op(sys);
  const std::vector<std::string> names{"/left", "/right"};
  std::map<std::string, PhoneClient*> phone;
  std::map<std::string, Subscription> pose_tap, button_tap, target_tap;
  for (const auto& ns : names) {
    pose_tap[ns] = sys.bus().subscribe(TopicName(ns, topics::kPhonePose), QosProfile::keep_last(1 << 17));
    button_tap[ns] = sys.bus().subscribe(TopicName(ns, topics::kButton), QosProfile::keep_last(1 << 16));
    target_tap[ns] = sys.bus().subscribe(TopicName(ns, topics::kTargetPose), QosProfile::keep_last(1 << 17));
    phone[ns] = &op.connect(ns, "phone" + ns);
  }

  BimanualRun run;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> step(-0.004, 0.004);
  std::map<std::string, Vec3> at;

  auto send_pose = [&](const std::string& ns) {
    phone[ns]->send_pose(at[ns], Quat::identity(), to_seconds(sys.clock().now()) * 1e3);
    ++run.poses_sent[ns];
  };
  auto press = [&](const std::string& ns, Button b) {
    phone[ns]->press(b, to_seconds(sys.clock().now()) * 1e3);
    ++run.buttons_sent[ns];
  };

  for (const auto& ns : names) {
    at[ns] = {0, 0, 0};
    send_pose(ns);
  }
  op.sync();
  sys.wait(std::chrono::milliseconds(50));
  for (const auto& ns : names) {
    press(ns, Button::volume_up);
    phone[ns]->recorder(RecorderAction::start, "bimanual " + ns.substr(1));
  }
  op.sync();

  const std::size_t stop_recording_at = n_commands * 3 / 10;
  for (std::size_t i = 0; i < n_commands; ++i) {
    const std::string& ns = names[rng() % 2];
    const double r = u(rng);
    if (r < 0.95) {
      Vec3& p = at[ns];
      p = {std::clamp(p.x + step(rng), -0.1, 0.1), std::clamp(p.y + step(rng), -0.1, 0.1),
           std::clamp(p.z + step(rng), -0.1, 0.1)};
      send_pose(ns);
    } else if (r < 0.98) {
      press(ns, Button::volume_up);
    } else {
      press(ns, Button::volume_down);
    }
    ++run.commands;
    if (i + 1 == stop_recording_at) {
      for (const auto& n : names) phone[n]->recorder(RecorderAction::stop);
    }
    op.sync();
    sys.wait(std::chrono::milliseconds(5));
  }
  sys.wait(std::chrono::milliseconds(300));

  for (const auto& ns : names) {
    const std::string own_id = "phone" + ns;
    uint64_t poses = 0;
    for (const Envelope& e : pose_tap[ns].drain()) {
      ++poses;
      if (e.get<PoseSample>().frame_id != own_id) ++run.leakage;
    }
    const uint64_t buttons = button_tap[ns].drain().size();
    run.leakage += poses > run.poses_sent[ns] ? poses - run.poses_sent[ns] : run.poses_sent[ns] - poses;
    run.leakage +=
        buttons > run.buttons_sent[ns] ? buttons - run.buttons_sent[ns] : run.buttons_sent[ns] - buttons;

    std::map<uint64_t, robot::WireCommand> expected;
    for (const Envelope& e : target_tap[ns].drain()) expected[e.sequence] = robot::to_wire(e.get<TargetPose>(), e.sequence);
    for (const robot::WireCommand& c : sys.arm(ns).controller->received_commands()) {
      ++run.movl_received[ns];
      const auto it = expected.find(c.seq);
      if (it == expected.end() || std::abs(it->second.x - c.x) > 1e-6 || std::abs(it->second.y - c.y) > 1e-6 ||
          std::abs(it->second.z - c.z) > 1e-6) {
        ++run.leakage;
      } else {
        ++run.movl_checked[ns];
      }
    }
    run.episodes[ns] = sys.arm(ns).recorder->exports().size();
  }
  sys.stop();
  for (const auto& ns : names) {
    run.reports[ns] = dataset::validate_dataset(sys.profile().output_root(sys.profile().arm(ns)));
  }
  return run;
}

}  // namespace teleop::test
