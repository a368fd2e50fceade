#include "teleop/orchestrator/system.hpp"

#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleop/robot/driver.hpp"

namespace teleop {

System::System(LaunchProfile profile, Storage* storage) : profile_(std::move(profile)) {
  profile_.validate();
  if (profile_.clock == ClockMode::virtual_time) {
    auto vc = std::make_unique<VirtualClock>();
    virtual_clock_ = vc.get();
    clock_ = std::move(vc);
  } else {
    clock_ = std::make_unique<SteadyClock>();
  }
  if (storage) {
    storage_ = storage;
  } else {
    owned_storage_ = std::make_unique<FilesystemStorage>();
    storage_ = owned_storage_.get();
  }
  bus_ = std::make_unique<Bus>(*clock_);
  gateway_ = std::make_unique<Gateway>(*bus_, profile_.gateway);
}

System::~System() { stop(); }

void System::start() {
  if (running_) return;
  try {
    gateway_->start();
    for (const ArmProfile& a : profile_.arms) {
      ArmStack s;
      s.profile = a;
      robot::ControllerConfig cc;
      cc.bind_address = a.controller_address;
      cc.port = a.controller_port;
      cc.sim = a.sim;
      s.controller = std::make_unique<robot::MockController>(*clock_, cc);
      s.controller->start();

      robot::BridgeConfig bc = a.bridge;
      bc.kinematics = a.sim;
      s.bridge = std::make_unique<robot::BridgeNode>(
          *bus_, a.ns, std::make_unique<robot::TcpWireDriver>(a.controller_address, s.controller->port()),
          bc);
      s.planner = std::make_unique<PlannerNode>(*bus_, a.ns, a.planner);
      for (const CameraConfig& c : a.cameras) {
        s.cameras.push_back(std::make_unique<CameraSource>(*bus_, a.ns, c, a.planner.workspace));
      }
      s.recorder = std::make_unique<RecorderNode>(*bus_, a.ns, profile_.recorder_config(a), *storage_);
      arms_.push_back(std::move(s));
    }
  } catch (...) {
    stop();
    throw;
  }
  running_ = true;
  spdlog::info("system up: gateway ws://{}:{}, {} arm(s), {} clock", profile_.gateway.bind_address,
               gateway_->port(), arms_.size(), clock_->is_virtual() ? "virtual" : "wall");

  if (!clock_->is_virtual()) {
    for (auto& a : arms_) a.bridge->start();
    loop_running_ = true;
    loop_ = std::thread([this] { node_loop(); });
  } else {
    // Let bridges connect and publish an initial feedback sample.
    step_nodes(clock_->now(), true);
  }
}

void System::stop() {
  loop_running_ = false;
  if (loop_.joinable()) loop_.join();
  if (gateway_) gateway_->stop();
  for (auto& a : arms_) {
    if (a.bridge) a.bridge->stop();
    if (a.controller) a.controller->stop();
  }
  running_ = false;
}

ArmStack& System::arm(std::string_view ns) {
  const std::string key = normalize_namespace(ns);
  for (auto& a : arms_) {
    if (a.profile.ns == key) return a;
  }
  throw std::out_of_range(fmt::format("no arm with namespace '{}'", ns));
}

void System::step_nodes(Nanos now, bool with_bridges) {
  std::lock_guard lock(nodes_mu_);
  for (auto& a : arms_) {
    a.planner->step();
    if (with_bridges) a.bridge->step(now);
    for (auto& c : a.cameras) c->step(now);
    a.recorder->step(now);
  }
}

void System::tick() {
  if (!virtual_clock_) throw std::logic_error("tick() needs the virtual clock");
  if (!running_) throw std::logic_error("system is not running");
  virtual_clock_->advance(profile_.tick);
  step_nodes(virtual_clock_->now(), true);
}

void System::wait(Nanos d) {
  if (virtual_clock_) {
    const Nanos until = virtual_clock_->now() + d;
    while (virtual_clock_->now() + profile_.tick <= until) tick();
    return;
  }
  std::this_thread::sleep_for(d);
}

void System::node_loop() {
  auto next = std::chrono::steady_clock::now();
  while (loop_running_) {
    step_nodes(clock_->now(), false);
    next += profile_.tick;
    const auto now = std::chrono::steady_clock::now();
    // After a long stall, resynchronize rather than spin to catch up.
    if (next < now - std::chrono::milliseconds(100)) next = now;
    std::this_thread::sleep_until(next);
  }
}

Operator::Operator(System& system) : system_(system), base_(system.gateway().frames_processed()) {}

PhoneClient& Operator::connect(std::string_view ns, std::string frame_id) {
  const std::size_t before = system_.gateway().connections().size();
  auto c = std::make_unique<PhoneClient>("127.0.0.1", system_.gateway_port(), std::string(ns),
                                         std::move(frame_id));
  c->connect();
  clients_.push_back(std::move(c));
  if (!system_.gateway().wait_connections(before + 1, std::chrono::seconds(5))) {
    throw std::runtime_error("gateway did not complete the handshake");
  }
  sync();
  return *clients_.back();
}

void Operator::sync() {
  uint64_t expected = base_;
  for (const auto& c : clients_) expected += c->frames_sent();
  if (!system_.gateway().wait_processed(expected, std::chrono::seconds(10))) {
    throw std::runtime_error(fmt::format("gateway processed {} of {} frames in time",
                                         system_.gateway().frames_processed(), expected));
  }
}

void Operator::pose(PhoneClient& c, Vec3 position, const Rpy& rpy) {
  c.send_pose(position, rpy_to_quat(rpy), to_seconds(system_.clock().now()) * 1e3);
  sync();
}

void Operator::press(PhoneClient& c, Button b) {
  c.press(b, to_seconds(system_.clock().now()) * 1e3);
  sync();
}

void Operator::record(PhoneClient& c, RecorderAction a, const std::string& task) {
  c.recorder(a, task);
  sync();
}

}  // namespace teleop
