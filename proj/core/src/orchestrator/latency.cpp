#include "teleop/orchestrator/latency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleop/topics.hpp"

namespace teleop {

namespace {

// Phone-frame displacement that the axis map turns into robot delta d.
Vec3 phone_delta_for(const AxisMap& map, Vec3 d) {
  const auto& m = map.m;
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  double inv[3][3];
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  const double s = map.scale;
  return {(inv[0][0] * d.x + inv[0][1] * d.y + inv[0][2] * d.z) / s,
          (inv[1][0] * d.x + inv[1][1] * d.y + inv[1][2] * d.z) / s,
          (inv[2][0] * d.x + inv[2][1] * d.y + inv[2][2] * d.z) / s};
}

std::optional<RobotState> latest_feedback(System& sys, const std::string& ns) {
  if (auto e = sys.bus().latest(TopicName(ns, topics::kRobotFeedback));
      e && e->kind() == PayloadKind::robot_state) {
    return e->get<RobotState>();
  }
  return std::nullopt;
}

// Advances time by one slice and returns what arrived meanwhile.
std::vector<Envelope> pump(System& sys, Subscription& sub) {
  if (sys.clock().is_virtual()) {
    sys.wait(sys.profile().tick);
    return sub.drain();
  }
  std::vector<Envelope> out;
  if (auto e = sub.wait(std::chrono::milliseconds(20))) out.push_back(std::move(*e));
  for (auto& e : sub.drain()) out.push_back(std::move(e));
  return out;
}

}  // namespace

double LatencyTrial::latency_ms() const {
  if (!first_motion) return std::numeric_limits<double>::quiet_NaN();
  return std::chrono::duration<double, std::milli>(*first_motion - injected).count();
}

double analytic_latency_ms(const robot::SimArmConfig& sim, double step, double epsilon) {
  if (!(epsilon < step)) return std::numeric_limits<double>::infinity();
  return 1e3 * (sim.transport_delay + sim.lag_time_constant * std::log(step / (step - epsilon)));
}

LatencyReport measure_latency(System& sys, const LatencyOptions& opt) {
  if (opt.trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (!(opt.epsilon > 0.0) || !(opt.step > 0.0)) {
    throw std::invalid_argument("epsilon and step must be positive");
  }
  ArmStack& arm = sys.arm(opt.ns);
  const std::string ns = arm.profile.ns;

  LatencyReport report;
  report.analytic_ms = analytic_latency_ms(arm.profile.sim, opt.step, opt.epsilon);

  Operator op(sys);
  PhoneClient& phone = op.connect(ns, "latency-probe");
  const Vec3 origin{0.0, 0.0, 0.0};
  op.pose(phone, origin);

  // The planner needs a feedback sample and a phone pose before it lets go.
  const Nanos deadline = sys.clock().now() + opt.timeout;
  while (!latest_feedback(sys, ns)) {
    if (sys.clock().now() > deadline) throw std::runtime_error("no robot feedback; is the bridge connected?");
    sys.wait(std::chrono::milliseconds(10));
  }
  sys.wait(std::chrono::milliseconds(20));
  op.press(phone, Button::volume_up);
  sys.wait(std::chrono::milliseconds(20));
  {
    auto lock = sys.lock_nodes();
    if (arm.planner->planner().clutch().mode != ClutchMode::released) {
      throw std::runtime_error("clutch did not release");
    }
  }

  Subscription sub = sys.bus().subscribe(TopicName(ns, topics::kRobotFeedback), QosProfile::keep_last(4096),
                                         PayloadKind::robot_state);
  Vec3 robot_offset{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < opt.trials; ++k) {
    sys.wait(opt.settle);
    sub.clear();
    const auto rest = latest_feedback(sys, ns);
    if (!rest) throw std::runtime_error("robot feedback disappeared");

    robot_offset.x += (k % 2 == 0) ? opt.step : -opt.step;
    const Vec3 phone_pos = origin + phone_delta_for(arm.profile.planner.axis_map, robot_offset);

    LatencyTrial trial;
    trial.injected = sys.clock().now();
    op.pose(phone, phone_pos);
    const Nanos give_up = trial.injected + opt.timeout;
    while (!trial.first_motion && sys.clock().now() < give_up) {
      for (const Envelope& e : pump(sys, sub)) {
        const auto& s = e.get<RobotState>();
        if (s.stamp <= trial.injected) continue;
        if ((s.ee_position - rest->ee_position).norm() > opt.epsilon) {
          trial.first_motion = s.stamp;
          break;
        }
      }
    }
    if (trial.failed()) {
      ++report.failures;
      spdlog::warn("latency trial {}: no motion beyond {} m within {} s", k, opt.epsilon,
                   to_seconds(opt.timeout));
    }
    report.trials.push_back(trial);
  }
  phone.close();

  std::vector<double> ok;
  for (const auto& t : report.trials) {
    if (!t.failed()) ok.push_back(t.latency_ms());
  }
  if (!ok.empty()) {
    report.min_ms = *std::min_element(ok.begin(), ok.end());
    report.max_ms = *std::max_element(ok.begin(), ok.end());
    report.mean_ms = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
  }
  return report;
}

std::string format_report(const LatencyReport& r) {
  std::string out;
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const auto& t = r.trials[i];
    if (t.failed()) {
      out += fmt::format("trial {:2d}: injected {:.3f} s, no motion (timeout)\n", i, to_seconds(t.injected));
    } else {
      out += fmt::format("trial {:2d}: injected {:.3f} s, first motion {:.3f} s, {:.1f} ms\n", i,
                         to_seconds(t.injected), to_seconds(*t.first_motion), t.latency_ms());
    }
  }
  out += fmt::format("trials {} failed {}  min {:.1f} ms  mean {:.1f} ms  max {:.1f} ms  analytic {:.1f} ms\n",
                     r.trials.size(), r.failures, r.min_ms, r.mean_ms, r.max_ms, r.analytic_ms);
  return out;
}

}  // namespace teleop
