#include <gtest/gtest.h>

#include "support/support.hpp"
#include "teleop/recorder/camera.hpp"
#include "teleop/recorder/dataset.hpp"
#include "teleop/recorder/recorder.hpp"
#include "teleop/topics.hpp"

namespace teleop {
namespace {

using namespace std::chrono_literals;

// One namespace with a camera and a feedback source, stepped at 1 ms.
struct RecorderFixture : ::testing::Test {
  test::TempDir dir{"rec"};
  VirtualClock clock;
  Bus bus{clock};
  FilesystemStorage storage;
  std::unique_ptr<CameraSource> cam;
  std::unique_ptr<RecorderNode> rec;
  bool feedback_on = true;

  void make(RecorderConfig c = {}) {
    CameraConfig cc;
    cc.width = 16;
    cc.height = 12;
    cam = std::make_unique<CameraSource>(bus, "/a", cc);
    c.cameras = {cc.name};
    c.export_config.root = dir.path();
    c.export_config.video.mode = VideoMode::image_sequence;
    rec = std::make_unique<RecorderNode>(bus, "/a", c, storage);
  }
  void run(Nanos d) {
    const Nanos end = clock.now() + d;
    while (clock.now() < end) {
      if (feedback_on && clock.now().count() % 10'000'000 == 0) {
        RobotState s;
        s.ee_position = {0.4, 0, 0.25};
        s.stamp = clock.now();
        bus.publish(TopicName("/a", topics::kRobotFeedback), s);
      }
      cam->step(clock.now());
      rec->step(clock.now());
      clock.advance(1ms);
    }
  }
  void send(RecorderAction a) { bus.publish(TopicName("/a", topics::kRecorderControl), RecorderCommand{a, "task"}); }
};

TEST_F(RecorderFixture, RecordsAtTwentyHzAndExportsOnStop) {
  make();
  run(100ms);
  send(RecorderAction::start);
  run(1000ms);
  EXPECT_EQ(rec->status().phase, RecorderPhase::recording);
  send(RecorderAction::stop);
  run(5ms);
  ASSERT_EQ(rec->exports().size(), 1u);
  EXPECT_NEAR(rec->exports()[0].length, 20u, 1u);
  EXPECT_TRUE(rec->last_error().empty());
  EXPECT_TRUE(dataset::validate_dataset(dir.path()).ok());
}

TEST_F(RecorderFixture, StaleSourcesSkipTicks) {
  make();
  run(100ms);
  send(RecorderAction::start);
  run(500ms);
  const uint32_t before = rec->status().frames;
  cam->set_frozen(true);
  run(500ms);
  EXPECT_LE(rec->status().frames, before + 2);
  EXPECT_GT(rec->status().ticks_skipped, 5u);
  cam->set_frozen(false);
  feedback_on = false;
  run(300ms);
  EXPECT_LE(rec->status().frames, before + 4);
}

TEST_F(RecorderFixture, DiscardWritesNothing) {
  make();
  run(100ms);
  send(RecorderAction::start);
  run(500ms);
  send(RecorderAction::discard);
  run(5ms);
  EXPECT_TRUE(rec->exports().empty());
  EXPECT_FALSE(std::filesystem::exists(dir / "meta"));
  EXPECT_EQ(rec->status().phase, RecorderPhase::idle);
}

TEST_F(RecorderFixture, MemoryCeilingFailsTheEpisode) {
  RecorderConfig c;
  c.memory_ceiling_bytes = 20'000;
  make(c);
  run(100ms);
  send(RecorderAction::start);
  run(2000ms);
  EXPECT_EQ(rec->status().phase, RecorderPhase::failed);
  EXPECT_NE(rec->last_error().find("memory ceiling"), std::string::npos);
  send(RecorderAction::stop);
  run(5ms);
  EXPECT_TRUE(rec->exports().empty());
  // A fresh start recovers.
  send(RecorderAction::start);
  run(200ms);
  EXPECT_EQ(rec->status().phase, RecorderPhase::recording);
}

TEST_F(RecorderFixture, ManualExportWhenAutoExportIsOff) {
  RecorderConfig c;
  c.auto_export = false;
  make(c);
  run(100ms);
  rec->command({RecorderAction::start, "manual"}, clock.now());
  run(300ms);
  rec->command({RecorderAction::stop, {}}, clock.now());
  auto ep = rec->take_stopped_episode();
  ASSERT_NE(ep, nullptr);
  EXPECT_EQ(ep->task(), "manual");
  EXPECT_TRUE(rec->exports().empty());
  EXPECT_FALSE(std::filesystem::exists(dir / "meta"));
}

TEST(RecorderConfig, Validation) {
  RecorderConfig c;
  EXPECT_NO_THROW(c.validate());
  c.memory_ceiling_bytes = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.cameras.clear();
  c.fps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace teleop
