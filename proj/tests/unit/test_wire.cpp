#include <random>

#include <gtest/gtest.h>

#include "teleop/robot/wire.hpp"

namespace teleop::robot {
namespace {

TEST(Wire, FormatsAndParsesEveryVerb) {
  const WireCommand c{400, -12.5, 250, 180, 0, -90, 7};
  EXPECT_EQ(format_line(c), "MOVL 400.000000,-12.500000,250.000000,180.000000,0.000000,-90.000000,7\n");
  const auto back = std::get<WireCommand>(parse_line(format_line(c)));
  EXPECT_EQ(back.x, 400);
  EXPECT_EQ(back.y, -12.5);
  EXPECT_EQ(back.seq, 7u);

  const WireState s{1, 2, 3, 4, 5, 6, true, 9};
  const auto sb = std::get<WireState>(parse_line("STATE 1,2,3,4,5,6,1,9"));
  EXPECT_EQ(sb.z, s.z);
  EXPECT_TRUE(sb.gripper_closed);
  EXPECT_EQ(sb.seq, 9u);

  EXPECT_EQ(format_line(GripRequest{true, 3}), "GRIP 1,3\n");
  EXPECT_TRUE(std::get<GripRequest>(parse_line("GRIP 1,3\n")).closed);
  EXPECT_EQ(format_line(PollRequest{11}), "POLL 11\n");
  EXPECT_EQ(std::get<PollRequest>(parse_line("POLL 11")).seq, 11u);
}

TEST(Wire, RejectsBadLines) {
  EXPECT_THROW(parse_line(""), WireParseError);
  EXPECT_THROW(parse_line("JUMP 1,2"), WireParseError);
  EXPECT_THROW(parse_line("MOVL 1,2,3,4,5,6"), WireParseError);
  EXPECT_THROW(parse_line("MOVL 1,2,3,4,5,x,1"), WireParseError);
  EXPECT_THROW(parse_line("MOVL 1,2,3,4,5,nan,1"), WireParseError);
  EXPECT_THROW(parse_line("GRIP 2,1"), WireParseError);
  EXPECT_THROW(parse_line("POLL -1"), WireParseError);
}

TEST(Wire, UnitConversion) {
  TargetPose t;
  t.position = {0.4, -0.1, 0.25};
  t.orientation = rpy_to_quat({kPi / 2, 0, -kPi / 4});
  const WireCommand c = to_wire(t, 5);
  EXPECT_NEAR(c.x, 400.0, 1e-9);
  EXPECT_NEAR(c.y, -100.0, 1e-9);
  EXPECT_NEAR(c.z, 250.0, 1e-9);
  EXPECT_NEAR(c.rx, 90.0, 1e-9);
  EXPECT_NEAR(c.rz, -45.0, 1e-9);
  EXPECT_EQ(c.seq, 5u);
  EXPECT_THROW(from_wire_state(WireState{NAN, 0, 0, 0, 0, 0, false, 0}), WireParseError);
}

// Six decimals on the wire bounds the text round trip to half a unit in the
// last place: 5e-7 mm and 5e-7 deg per field.
TEST(Wire, TextRoundTripWithinQuantization) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mm(-1000, 1000), deg(-180, 180);
  double worst = 0;
  for (int i = 0; i < 5000; ++i) {
    const WireState s{mm(rng), mm(rng), mm(rng), deg(rng), deg(rng), deg(rng), i % 2 == 0,
                      static_cast<uint64_t>(i)};
    const auto b = std::get<WireState>(parse_line(format_line(s)));
    worst = std::max({worst, std::abs(b.x - s.x), std::abs(b.y - s.y), std::abs(b.z - s.z),
                      std::abs(b.rx - s.rx), std::abs(b.ry - s.ry), std::abs(b.rz - s.rz)});
    EXPECT_EQ(b.gripper_closed, s.gripper_closed);
    EXPECT_EQ(b.seq, s.seq);
  }
  EXPECT_LE(worst, 5e-7 + 1e-12);
}

}  // namespace
}  // namespace teleop::robot
