#include <gtest/gtest.h>

#include "support/support.hpp"
#include "teleop/orchestrator/replay.hpp"
#include "teleop/orchestrator/system.hpp"

namespace teleop {
namespace {

int error_line(std::string_view text) {
  try {
    parse_replay(text);
  } catch (const ReplayParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line " + std::to_string(e.line())), std::string::npos);
    return e.line();
  }
  return 0;
}

TEST(Replay, ParsesEveryCommand) {
  const ReplayScript s = parse_replay(R"(# header
0.0 pose 0 0 0
0.1 button volume_up        # release
0.2 @left ramp 1.0 0.1 0 0 0 0 90
0.3 record start pick the cube
0.4 rate 25
0.5 noise 0.001
0.6 button volume_down
2.0 record stop
3.0 end
)");
  ASSERT_EQ(s.events.size(), 8u);
  EXPECT_EQ(s.events[2].ns, "/left");
  const auto& ramp = std::get<ReplayRamp>(s.events[2].command);
  EXPECT_DOUBLE_EQ(ramp.duration, 1.0);
  EXPECT_NEAR(ramp.to.rpy.yaw, kPi / 2, 1e-12);
  EXPECT_EQ(std::get<ReplayRecord>(s.events[3].command).task, "pick the cube");
  EXPECT_EQ(s.events[7].line, 9);
  EXPECT_EQ(s.duration(), 3.0);
  EXPECT_EQ(s.namespaces(), (std::vector<std::string>{"", "/left"}));
  EXPECT_DOUBLE_EQ(parse_replay("1 pose 0 0 0").duration(), 1.5);
}

TEST(Replay, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("0 pose 0 0 0\n\n0.5 pose 1 2"), 3);
  EXPECT_EQ(error_line("0 pose 0 0 0\n0.5 dance"), 2);
  EXPECT_EQ(error_line("1 pose 0 0 0\n0.5 pose 0 0 0"), 2);
  EXPECT_EQ(error_line("x pose 0 0 0"), 1);
  EXPECT_EQ(error_line("0 button power"), 1);
  EXPECT_EQ(error_line("0 record pause"), 1);
  EXPECT_EQ(error_line("0 rate 0"), 1);
  EXPECT_EQ(error_line("0 noise -1"), 1);
  EXPECT_EQ(error_line("0 ramp -1 0 0 0"), 1);
  EXPECT_EQ(error_line("0 end\n1 pose 0 0 0"), 2);
  EXPECT_EQ(error_line("0 @left"), 1);
}

TEST(Replay, ShippedScriptRecordsValidDatasets) {
  test::TempDir dir("replay");
  const ReplayScript script =
      load_replay(std::filesystem::path(TELEOP_SOURCE_DIR) / "tools" / "scripts" / "pick_and_place.replay");
  System sys(test::test_profile(false, dir.path()));
  sys.start();
  const ReplayResult r = replay_operator(script, sys, 5);
  sys.stop();
  EXPECT_TRUE(r.recorder_errors.empty());
  ASSERT_EQ(r.exports.at("").size(), 2u);
  const auto report = dataset::validate_dataset(dir.path());
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.episodes, 2u);
}

TEST(Replay, NamespaceNotInProfileIsRejected) {
  test::TempDir dir("replay-ns");
  System sys(test::test_profile(false, dir.path()));
  sys.start();
  EXPECT_ANY_THROW(replay_operator(parse_replay("0 @ghost pose 0 0 0"), sys, 1));
  sys.stop();
}

}  // namespace
}  // namespace teleop
