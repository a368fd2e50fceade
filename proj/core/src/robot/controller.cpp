#include "teleop/robot/controller.hpp"

#include <sys/socket.h>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleop/robot/wire.hpp"

namespace teleop::robot {

MockController::MockController(const Clock& clock, ControllerConfig config)
    : clock_(clock), config_(std::move(config)), arm_(config_.sim, clock.now()) {}

MockController::~MockController() { stop(); }

void MockController::start() {
  try {
    listener_ = net::Socket::listen_tcp(config_.bind_address, config_.port);
  } catch (const net::SocketError& e) {
    throw StartupError(fmt::format("controller port {}: {}", config_.port, e.what()));
  }
  port_ = listener_.local_port();
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void MockController::stop() {
  if (!running_.exchange(false)) return;
  {
    std::lock_guard lock(mu_);
    stalled_ = false;
  }
  stall_cv_.notify_all();
  {
    std::lock_guard lock(clients_mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  for (auto& t : client_threads_) {
    if (t.joinable()) t.join();
  }
  client_threads_.clear();
  listener_.close();
}

void MockController::set_stalled(bool stalled) {
  {
    std::lock_guard lock(mu_);
    stalled_ = stalled;
  }
  stall_cv_.notify_all();
}

std::vector<uint64_t> MockController::received_command_seqs() const {
  std::lock_guard lock(mu_);
  std::vector<uint64_t> seqs;
  seqs.reserve(commands_.size());
  for (const auto& c : commands_) seqs.push_back(c.seq);
  return seqs;
}

std::vector<WireCommand> MockController::received_commands() const {
  std::lock_guard lock(mu_);
  return commands_;
}

RobotState MockController::state() {
  std::lock_guard lock(mu_);
  return arm_.advance_to(clock_.now());
}

void MockController::drop_client() {
  std::lock_guard lock(clients_mu_);
  for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
}

void MockController::accept_loop() {
  while (running_) {
    auto client = listener_.accept(std::chrono::milliseconds(50));
    if (!client) continue;
    std::lock_guard lock(clients_mu_);
    client_fds_.push_back(client->fd());
    client_threads_.emplace_back([this, c = std::move(*client)]() mutable { serve(std::move(c)); });
  }
}

void MockController::serve(net::Socket client) {
  const int fd = client.fd();
  try {
    while (running_) {
      auto line = client.read_line(std::chrono::milliseconds(50));
      if (!line) continue;
      ++requests_received_;
      const std::string reply = handle(*line);
      if (!reply.empty()) client.write_all(reply);
    }
  } catch (const net::SocketError&) {
    // peer went away
  }
  std::lock_guard lock(clients_mu_);
  std::erase(client_fds_, fd);
}

std::string MockController::handle(const std::string& line) {
  WireMessage msg;
  try {
    msg = parse_line(line);
  } catch (const WireParseError& e) {
    ++parse_errors_;
    spdlog::warn("mock controller: rejected line: {}", e.what());
    return "ERR " + std::string(e.what()) + "\n";
  }

  std::unique_lock lock(mu_);
  if (const auto* c = std::get_if<WireCommand>(&msg)) commands_.push_back(*c);
  stall_cv_.wait(lock, [&] { return !stalled_ || !running_; });
  if (!running_) return {};

  const Nanos now = clock_.now();
  arm_.advance_to(now);
  uint64_t seq = 0;
  if (const auto* c = std::get_if<WireCommand>(&msg)) {
    TargetPose t;
    t.position = {c->x / 1000.0, c->y / 1000.0, c->z / 1000.0};
    t.orientation = rpy_to_quat({deg_to_rad(c->rx), deg_to_rad(c->ry), deg_to_rad(c->rz)});
    arm_.command(t, now);
    seq = c->seq;
  } else if (const auto* g = std::get_if<GripRequest>(&msg)) {
    arm_.set_gripper(g->closed);
    seq = g->seq;
  } else if (const auto* p = std::get_if<PollRequest>(&msg)) {
    seq = p->seq;
  } else {
    ++parse_errors_;
    return "ERR unexpected STATE from client\n";
  }
  return format_line(to_wire_state(arm_.state(), seq));
}

}  // namespace teleop::robot
