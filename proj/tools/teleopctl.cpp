// teleopctl: launch, measure, replay and validate.
//
// Exit codes: 0 ok, 1 violations (failed trials, invalid dataset, recorder
// errors), 2 fatal (bad config, startup failure, unexpected error).

#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleop/orchestrator/config.hpp"
#include "teleop/orchestrator/latency.hpp"
#include "teleop/orchestrator/replay.hpp"
#include "teleop/orchestrator/system.hpp"
#include "teleop/recorder/dataset.hpp"

namespace {

using namespace teleop;

constexpr int kOk = 0;
constexpr int kViolations = 1;
constexpr int kFatal = 2;

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

struct CommonFlags {
  std::string config;
  std::string profile = "single";
  std::optional<uint16_t> port;
  std::optional<uint16_t> controller_port;
  std::string output_root;
  std::string clock;
  std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "Launch profile (TOML)")->check(CLI::ExistingFile);
  cmd->add_option("--profile", f.profile, "Built-in profile when no config is given")
      ->check(CLI::IsMember({"single", "bimanual"}));
  cmd->add_option("--port", f.port, "Gateway WebSocket port (0 = ephemeral)");
  cmd->add_option("--controller-port", f.controller_port,
                  "First mock controller port; arm i gets port + i (0 = ephemeral)");
  cmd->add_option("-o,--output-root", f.output_root, "Dataset output root");
  cmd->add_option("--clock", f.clock, "Clock mode")->check(CLI::IsMember({"virtual", "wall"}));
  cmd->add_option("--seed", f.seed, "Seed for synthetic cameras and replay noise");
}

LaunchProfile resolve_profile(const CommonFlags& f, ClockMode default_clock, bool clock_from_file) {
  LaunchProfile p;
  if (!f.config.empty()) {
    p = load_profile(f.config);
  } else {
    p = f.profile == "bimanual" ? LaunchProfile::bimanual() : LaunchProfile::single_arm();
    if (!clock_from_file) p.clock = default_clock;
  }
  if (f.port) p.gateway.port = *f.port;
  if (f.controller_port) {
    for (std::size_t i = 0; i < p.arms.size(); ++i) {
      p.arms[i].controller_port = *f.controller_port == 0 ? 0 : static_cast<uint16_t>(*f.controller_port + i);
    }
  }
  if (!f.output_root.empty()) p.recorder.output_root = f.output_root;
  if (!f.clock.empty()) p.clock = f.clock == "wall" ? ClockMode::wall : ClockMode::virtual_time;
  if (f.seed) {
    p.seed = *f.seed;
    for (auto& a : p.arms) {
      for (auto& c : a.cameras) c.seed = *f.seed;
    }
  }
  p.validate();
  return p;
}

int print_validation(const std::filesystem::path& root) {
  const auto report = dataset::validate_dataset(root);
  for (const auto& v : report.violations) std::cout << dataset::format_violation(v) << "\n";
  std::cout << fmt::format("{}: {} episode(s), {} frame(s), {} violation(s)\n", root.string(), report.episodes,
                           report.frames, report.violations.size());
  return report.ok() ? kOk : kViolations;
}

int cmd_run(const CommonFlags& f, double duration_s) {
  System sys(resolve_profile(f, ClockMode::wall, false));
  sys.start();
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << fmt::format("gateway listening on ws://{}:{}\n", sys.profile().gateway.bind_address,
                           sys.gateway_port());
  for (const auto& a : sys.arms()) {
    std::cout << fmt::format("  arm '{}': controller port {}, dataset {}\n", a.profile.ns.empty() ? "/" : a.profile.ns,
                             a.controller->port(), sys.profile().output_root(a.profile).string());
  }
  std::cout.flush();
  const Nanos limit = duration_s > 0 ? from_seconds(duration_s) : Nanos::max();
  const Nanos start = sys.clock().now();
  while (!g_stop && sys.clock().now() - start < limit) sys.wait(std::chrono::milliseconds(50));
  spdlog::info("shutting down");
  sys.stop();
  return kOk;
}

int cmd_latency(const CommonFlags& f, LatencyOptions opt) {
  System sys(resolve_profile(f, ClockMode::virtual_time, true));
  sys.start();
  const LatencyReport r = measure_latency(sys, opt);
  sys.stop();
  std::cout << format_report(r);
  const bool in_band = r.failures == 0 && std::abs(r.mean_ms - r.analytic_ms) <= 0.10 * r.analytic_ms;
  std::cout << (in_band ? "mean within 10% of the analytic value\n" : "mean outside 10% of the analytic value\n");
  return in_band ? kOk : kViolations;
}

int cmd_replay(const CommonFlags& f, const std::string& script_path, bool validate) {
  const ReplayScript script = load_replay(script_path);
  System sys(resolve_profile(f, ClockMode::virtual_time, true));
  sys.start();
  const ReplayResult res = replay_operator(script, sys, sys.profile().seed);
  sys.stop();

  int rc = kOk;
  for (const auto& [ns, exports] : res.exports) {
    std::cout << fmt::format("arm '{}': {} episode(s) exported\n", ns.empty() ? "/" : ns, exports.size());
    for (const auto& d : exports) {
      std::cout << fmt::format("  episode {:06d}: {} frames\n", d.episode_index, d.length);
    }
  }
  for (const auto& [ns, err] : res.recorder_errors) {
    std::cout << fmt::format("arm '{}': recorder error: {}\n", ns.empty() ? "/" : ns, err);
    rc = kViolations;
  }
  if (validate) {
    for (const auto& [ns, exports] : res.exports) {
      if (exports.empty()) continue;
      if (print_validation(sys.profile().output_root(sys.profile().arm(ns))) != kOk) rc = kViolations;
    }
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phone teleoperation stack: gateway, planner, sim arm bridge and dataset recorder"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  CommonFlags common;

  auto* run = app.add_subcommand("run", "Launch a profile and serve phone clients until interrupted");
  add_common(run, common);
  double duration = 0.0;
  run->add_option("--duration", duration, "Stop after this many seconds (default: until SIGINT)");

  auto* lat = app.add_subcommand("measure-latency", "Time phone step to first observable arm motion");
  add_common(lat, common);
  LatencyOptions lopt;
  lat->add_option("--trials", lopt.trials)->check(CLI::PositiveNumber);
  lat->add_option("--epsilon", lopt.epsilon, "Motion threshold in meters")->check(CLI::PositiveNumber);
  lat->add_option("--step", lopt.step, "Step size in meters")->check(CLI::PositiveNumber);
  lat->add_option("--ns", lopt.ns, "Arm namespace");

  auto* rep = app.add_subcommand("replay", "Drive a scripted operator through the WebSocket path");
  add_common(rep, common);
  std::string script;
  bool no_validate = false;
  rep->add_option("script", script, "Replay script")->required()->check(CLI::ExistingFile);
  rep->add_flag("--no-validate", no_validate, "Skip validating the exported datasets");

  auto* val = app.add_subcommand("validate-dataset", "Check a dataset directory");
  std::string root;
  val->add_option("root", root, "Dataset root")->required();

  auto* cfg = app.add_subcommand("config", "Configuration helpers");
  cfg->require_subcommand(1);
  auto* print_default = cfg->add_subcommand("print-default", "Print a complete default profile");
  std::string pd_profile = "single";
  print_default->add_option("--profile", pd_profile)->check(CLI::IsMember({"single", "bimanual"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kFatal;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run) return cmd_run(common, duration);
    if (*lat) return cmd_latency(common, lopt);
    if (*rep) return cmd_replay(common, script, !no_validate);
    if (*val) return print_validation(root);
    if (*print_default) {
      std::cout << to_toml(pd_profile == "bimanual" ? LaunchProfile::bimanual() : LaunchProfile::single_arm());
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kFatal;
  } catch (const ReplayParseError& e) {
    std::cerr << "replay script: " << e.what() << "\n";
    return kFatal;
  } catch (const StartupError& e) {
    std::cerr << "startup failed: " << e.what() << "\n";
    return kFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFatal;
  }
  return kFatal;
}
