#include <thread>

#include <gtest/gtest.h>

#include "teleop/bus.hpp"

namespace teleop {
namespace {

ButtonEvent press(double stamp) { return ButtonEvent{Button::volume_up, stamp}; }

TEST(TopicName, JoinsAndSplits) {
  EXPECT_EQ(TopicName("/left", "phone2act/target_pose").full(), "/left/phone2act/target_pose");
  EXPECT_EQ(TopicName("", "phone2act/target_pose").full(), "/phone2act/target_pose");
  EXPECT_EQ(TopicName("left/", "phone2act/x").full(), "/left/phone2act/x");
  const TopicName t = TopicName::parse("/right/phone2act/button");
  EXPECT_EQ(t.ns(), "/right");
  EXPECT_EQ(t.base(), "phone2act/button");
  EXPECT_EQ(TopicName::parse("/phone2act/button").ns(), "");
  EXPECT_THROW(TopicName("/a", ""), std::invalid_argument);
}

TEST(TopicName, NormalizesNamespaces) {
  EXPECT_EQ(normalize_namespace("left"), "/left");
  EXPECT_EQ(normalize_namespace("/left/"), "/left");
  EXPECT_EQ(normalize_namespace("/"), "");
  EXPECT_EQ(normalize_namespace(""), "");
}

TEST(Bus, SequencesAndFanOut) {
  VirtualClock clock(std::chrono::seconds(3));
  Bus bus(clock);
  const TopicName t("/a", "phone2act/button");
  Subscription s1 = bus.subscribe(t, QosProfile::keep_last(10));
  Subscription s2 = bus.subscribe(t, QosProfile::keep_last(10));
  EXPECT_EQ(bus.publish(t, press(1)), 1u);
  EXPECT_EQ(bus.publish(t, press(2)), 2u);
  auto a = s1.drain();
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].sequence, 1u);
  EXPECT_EQ(a[1].sequence, 2u);
  EXPECT_LT(a[0].order, a[1].order);
  EXPECT_EQ(a[0].publish_time, std::chrono::seconds(3));
  EXPECT_EQ(s2.pending(), 2u);
  EXPECT_EQ(bus.latest(t)->get<ButtonEvent>().stamp_ms, 2.0);
}

TEST(Bus, KeepLastEvictsOldest) {
  VirtualClock clock;
  Bus bus(clock);
  const TopicName t("", "phone2act/target_pose");
  Subscription s = bus.subscribe(t, QosProfile::keep_last(1));
  for (int i = 0; i < 5; ++i) bus.publish(t, TargetPose{});
  auto got = s.drain();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].sequence, 5u);
  EXPECT_EQ(s.evicted(), 4u);
}

TEST(Bus, ReliableOverflowThrowsButOthersReceive) {
  VirtualClock clock;
  Bus bus(clock);
  const TopicName t("", "phone2act/button");
  Subscription rel = bus.subscribe(t, QosProfile::reliable(1));
  Subscription other = bus.subscribe(t, QosProfile::keep_last(4));
  bus.publish(t, press(1));
  EXPECT_THROW(bus.publish(t, press(2)), QueueOverflowError);
  EXPECT_EQ(other.pending(), 2u);
  EXPECT_EQ(rel.poll()->sequence, 1u);
}

TEST(Bus, TypeIsFixedByFirstUse) {
  VirtualClock clock;
  Bus bus(clock);
  const TopicName t("", "phone2act/button");
  bus.advertise(t, PayloadKind::button);
  EXPECT_THROW(bus.publish(t, TargetPose{}), TypeMismatchError);
  EXPECT_THROW(bus.subscribe(t, QosProfile::keep_last(1), PayloadKind::pose), TypeMismatchError);
  EXPECT_EQ(bus.kind_of(t), PayloadKind::button);
}

TEST(Bus, ExclusiveSubscriptionsConflict) {
  VirtualClock clock;
  Bus bus(clock);
  const TopicName t("", "phone2act/target_pose");
  QosProfile ex = QosProfile::keep_last(1);
  ex.exclusive = true;
  Subscription s = bus.subscribe(t, ex);
  EXPECT_THROW(bus.subscribe(t, ex), ConflictError);
  s = Subscription{};
  EXPECT_NO_THROW(bus.subscribe(t, ex));
  EXPECT_THROW(bus.subscribe(t, QosProfile::keep_last(0)), std::invalid_argument);
}

TEST(Bus, NamespacesAreIsolated) {
  VirtualClock clock;
  Bus bus(clock);
  Subscription left = bus.subscribe(TopicName("/left", "phone2act/button"), QosProfile::keep_last(8));
  Subscription right = bus.subscribe(TopicName("/right", "phone2act/button"), QosProfile::keep_last(8));
  bus.publish(TopicName("/left", "phone2act/button"), press(1));
  EXPECT_EQ(left.pending(), 1u);
  EXPECT_EQ(right.pending(), 0u);
}

TEST(Bus, UnsubscribeOnDestructionAndAfterBus) {
  VirtualClock clock;
  Subscription survivor;
  {
    Bus bus(clock);
    const TopicName t("", "phone2act/button");
    { Subscription gone = bus.subscribe(t, QosProfile::keep_last(1)); }
    EXPECT_NO_THROW(bus.publish(t, press(1)));
    survivor = bus.subscribe(t, QosProfile::keep_last(1));
  }
  EXPECT_FALSE(survivor.poll().has_value());
}

TEST(Bus, WaitWakesOnPublishFromAnotherThread) {
  VirtualClock clock;
  Bus bus(clock);
  const TopicName t("", "phone2act/button");
  Subscription s = bus.subscribe(t, QosProfile::keep_last(1));
  std::thread th([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    bus.publish(t, press(9));
  });
  auto e = s.wait(std::chrono::seconds(5));
  th.join();
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->get<ButtonEvent>().stamp_ms, 9.0);
  EXPECT_FALSE(s.wait(std::chrono::milliseconds(1)).has_value());
}

}  // namespace
}  // namespace teleop
