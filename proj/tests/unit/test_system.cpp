#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>

#include "support/bimanual.hpp"
#include "support/support.hpp"

namespace teleop {
namespace {

TEST(Bimanual, ReducedIsolationRun) {
  test::TempDir dir("bi");
  const test::BimanualRun r = test::run_bimanual(600, dir.path(), 3);
  EXPECT_EQ(r.commands, 600u);
  EXPECT_EQ(r.leakage, 0u);
  for (const std::string ns : {"/left", "/right"}) {
    EXPECT_GT(r.movl_received.at(ns), 0u) << ns;
    EXPECT_EQ(r.movl_checked.at(ns), r.movl_received.at(ns)) << ns;
    EXPECT_TRUE(r.reports.at(ns).ok()) << ns;
    EXPECT_EQ(r.episodes.at(ns), 1u) << ns;
  }
}

TEST(System, StartupFailureOnBusyPort) {
  test::TempDir dir("sys");
  System a(test::test_profile(false, dir.path()));
  a.start();
  LaunchProfile p = test::test_profile(false, dir / "b");
  p.gateway.port = a.gateway_port();
  System b(p);
  EXPECT_THROW(b.start(), StartupError);
  a.stop();
}

TEST(System, VirtualClockAdvancesOnlyWhenTold) {
  test::TempDir dir("sys2");
  System s(test::test_profile(true, dir.path()));
  s.start();
  const Nanos t0 = s.clock().now();
  s.wait(std::chrono::milliseconds(250));
  EXPECT_EQ(s.clock().now() - t0, std::chrono::milliseconds(250));
  EXPECT_EQ(s.arms().size(), 2u);
  EXPECT_THROW(s.arm("/middle"), std::exception);
  s.stop();
}

// The CLI is exercised as a subprocess so exit codes are observed exactly.
class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    if (std::string(TELEOPCTL_PATH).empty()) GTEST_SKIP() << "teleopctl not built";
  }
  int run(const std::string& args) {
    const std::string cmd = std::string(TELEOPCTL_PATH) + " --log-level off " + args + " >" +
                            (dir / "out.txt").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
  std::string output() {
    const auto b = test::read_bytes(dir / "out.txt");
    return {b.begin(), b.end()};
  }
  test::TempDir dir{"cli"};
};

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("config print-default --profile bimanual"), 0);
  EXPECT_NE(output().find("/right"), std::string::npos);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("validate-dataset " + (dir / "nothing").string()), 1);

  std::ofstream(dir / "bad.toml") << "[gateway]\nprot = 1\n";
  EXPECT_EQ(run("run -c " + (dir / "bad.toml").string() + " --duration 0.1"), 2);
  EXPECT_NE(output().find("gateway.prot"), std::string::npos);

  std::ofstream(dir / "bad.replay") << "0 pose 0 0 0\n1 jump\n";
  EXPECT_EQ(run("replay " + (dir / "bad.replay").string()), 2);
  EXPECT_NE(output().find("line 2"), std::string::npos);
}

TEST_F(Cli, ReplayThenValidate) {
  const std::string script = std::string(TELEOP_SOURCE_DIR) + "/tools/scripts/pick_and_place.replay";
  const std::string out = (dir / "ds").string();
  ASSERT_EQ(run("replay " + script + " --port 0 --controller-port 0 -o " + out), 0) << output();
  EXPECT_EQ(run("validate-dataset " + out), 0) << output();
  EXPECT_NE(output().find("2 episode(s)"), std::string::npos);
}

TEST_F(Cli, MeasureLatency) {
  EXPECT_EQ(run("measure-latency --trials 2 --port 0 --controller-port 0 -o " + (dir / "l").string()), 0)
      << output();
  EXPECT_EQ(run("measure-latency --trials 1 --step 0.001 --epsilon 0.002 --port 0 --controller-port 0 -o " +
                (dir / "l").string()),
            1);
}

}  // namespace
}  // namespace teleop
