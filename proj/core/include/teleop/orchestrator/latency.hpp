#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "teleop/clock.hpp"
#include "teleop/orchestrator/system.hpp"

namespace teleop {

struct LatencyOptions {
  std::size_t trials = 20;
  double epsilon = 0.002;  // meters of feedback displacement counted as motion
  // Robot-frame step per trial; consecutive trials alternate +x and -x. At
  // 2.6 mm with the default lag model the ε-crossing lands near 387 ms.
  double step = 0.0026;
  Nanos settle = std::chrono::seconds(2);   // rest time before each trial
  Nanos timeout = std::chrono::seconds(3);  // no motion by then: trial fails
  std::string ns;
};

struct LatencyTrial {
  Nanos injected{0};
  std::optional<Nanos> first_motion;  // feedback stamp of the first sample past ε
  bool failed() const { return !first_motion; }
  double latency_ms() const;
};

struct LatencyReport {
  std::vector<LatencyTrial> trials;
  std::size_t failures = 0;
  // Over successful trials; zero when none succeeded.
  double min_ms = 0.0;
  double mean_ms = 0.0;
  double max_ms = 0.0;
  /// Closed-form expectation: transport delay plus the first-order lag's
  /// time to cover ε of a step, tau * ln(step / (step - ε)). Infinite when
  /// ε >= step.
  double analytic_ms = 0.0;
};

/// Transport delay plus the ε-crossing time of a first-order lag, in ms.
double analytic_latency_ms(const robot::SimArmConfig& sim, double step, double epsilon);

/// Connects a phone client through the gateway, releases the clutch, then
/// injects `trials` step poses and times the first feedback sample that
/// moved more than ε from where the arm rested. Works on either clock.
LatencyReport measure_latency(System& system, const LatencyOptions& options = {});

std::string format_report(const LatencyReport& report);

}  // namespace teleop
