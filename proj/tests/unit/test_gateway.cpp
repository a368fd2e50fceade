#include <gtest/gtest.h>

#include "teleop/gateway.hpp"
#include "teleop/orchestrator/phone_client.hpp"
#include "teleop/topics.hpp"

namespace teleop {
namespace {

using namespace std::chrono_literals;

struct GatewayFixture : ::testing::Test {
  SteadyClock clock;
  Bus bus{clock};
  std::unique_ptr<Gateway> gw;
  void SetUp() override {
    GatewayConfig c;
    c.port = 0;
    gw = std::make_unique<Gateway>(bus, c);
    gw->start();
  }
  void TearDown() override { gw->stop(); }
};

TEST(RateMonitor, ReportsIntervalsJitterAndDrops) {
  RateMonitor m(20ms, 100);
  Nanos t{0};
  for (int i = 0; i < 10; ++i) {
    m.record(t);
    t += 20ms;
  }
  t += 40ms;  // two samples missing
  m.record(t);
  const RateReport r = m.report();
  EXPECT_EQ(r.samples, 11u);
  EXPECT_NEAR(r.mean_interval_ms, 240.0 / 10, 1e-9);
  EXPECT_EQ(r.drop_estimate, 2u);
  EXPECT_GT(r.jitter_ms, 0.0);
}

TEST_F(GatewayFixture, PoseAndButtonBecomeOneEnvelopeEach) {
  Subscription poses = bus.subscribe(TopicName("/left", topics::kPhonePose), QosProfile::keep_last(16));
  Subscription buttons = bus.subscribe(TopicName("/left", topics::kButton), QosProfile::keep_last(16));
  PhoneClient c("127.0.0.1", gw->port(), "/left", "phone-a");
  c.connect();
  c.send_pose({0.1, 0.2, 0.3}, Quat::identity(), 10);
  c.send_pose({0.2, 0.2, 0.3}, Quat::identity(), 30);
  c.press(Button::volume_up, 31);
  ASSERT_TRUE(gw->wait_processed(c.frames_sent(), 5s));
  auto p = poses.drain();
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].get<PoseSample>().frame_id, "phone-a");
  EXPECT_EQ(p[1].get<PoseSample>().position.x, 0.2);
  EXPECT_EQ(buttons.drain().size(), 1u);
  EXPECT_EQ(gw->frames_rejected(), 0u);
  auto infos = gw->connections();
  ASSERT_EQ(infos.size(), 1u);
  EXPECT_EQ(infos[0].advertised.size(), 2u);
}

TEST_F(GatewayFixture, MalformedFramesGetErrorsAndConnectionSurvives) {
  Subscription poses = bus.subscribe(TopicName("", topics::kPhonePose), QosProfile::keep_last(16));
  PhoneClient c("127.0.0.1", gw->port());
  c.connect();
  c.send_raw("{broken");
  c.send_raw(R"({"op":"publish","topic":"/phone2act/target_pose","msg":{}})");
  c.send_pose({0, 0, 0}, Quat::identity(), 100);
  c.send_pose({0, 0, 0}, Quat::identity(), 50);  // stamp went backwards
  ASSERT_TRUE(gw->wait_processed(c.frames_sent(), 5s));
  EXPECT_EQ(gw->frames_rejected(), 3u);
  int errors = 0;
  while (auto m = c.next_message(200ms)) {
    if ((*m)["op"] == "status" && (*m)["level"] == "error") ++errors;
  }
  EXPECT_EQ(errors, 3);
  EXPECT_TRUE(c.open());
  EXPECT_EQ(poses.drain().size(), 1u);
}

TEST_F(GatewayFixture, ForwardsSubscribedTopics) {
  PhoneClient c("127.0.0.1", gw->port(), "/right");
  c.connect();
  c.subscribe(std::string(topics::kPlannerState));
  ASSERT_TRUE(gw->wait_processed(c.frames_sent(), 5s));
  bus.publish(TopicName("/right", topics::kPlannerState), PlannerStatus{false, true, 3, 0});
  std::optional<nlohmann::json> got;
  while (auto m = c.next_message(2s)) {
    if ((*m)["op"] == "publish") {
      got = m;
      break;
    }
  }
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ((*got)["topic"], "/right/phone2act/planner_state");
}

TEST_F(GatewayFixture, ConnectionEventsPerNamespace) {
  Subscription conn = bus.subscribe(TopicName("/left", topics::kConnection), QosProfile::keep_last(8));
  {
    PhoneClient c("127.0.0.1", gw->port(), "/left");
    c.connect();
    ASSERT_TRUE(gw->wait_processed(c.frames_sent(), 5s));
    c.close();
  }
  std::vector<bool> states;
  while (auto e = conn.wait(2s)) {
    states.push_back(e->get<ConnectionEvent>().connected);
    if (states.size() == 2) break;
  }
  ASSERT_EQ(states.size(), 2u);
  EXPECT_TRUE(states[0]);
  EXPECT_FALSE(states[1]);
}

TEST(Gateway, BindFailureNamesThePort) {
  SteadyClock clock;
  Bus bus(clock);
  GatewayConfig c;
  c.port = 0;
  Gateway first(bus, c);
  first.start();
  c.port = first.port();
  Gateway second(bus, c);
  try {
    second.start();
    FAIL();
  } catch (const StartupError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(c.port)), std::string::npos);
  }
  first.stop();
}

}  // namespace
}  // namespace teleop
