#include "teleop/robot/driver.hpp"

#include <sys/socket.h>

#include <fmt/format.h>

namespace teleop::robot {

TcpWireDriver::TcpWireDriver(std::string host, uint16_t port,
                             std::chrono::milliseconds reply_timeout)
    : host_(std::move(host)), port_(port), reply_timeout_(reply_timeout) {}

void TcpWireDriver::connect() {
  try {
    socket_ = net::Socket::connect_tcp(host_, port_);
  } catch (const net::SocketError& e) {
    throw ConnectionError(e.what());
  }
  std::lock_guard lock(fd_mu_);
  fd_ = socket_.fd();
}

void TcpWireDriver::interrupt() {
  std::lock_guard lock(fd_mu_);
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

WireState TcpWireDriver::request(const WireMessage& msg) {
  if (!socket_.is_open()) throw ConnectionError("not connected");
  try {
    socket_.write_all(format_line(msg));
    auto line = socket_.read_line(reply_timeout_);
    if (!line) throw net::SocketError("controller reply timed out");
    auto reply = parse_line(*line);
    auto* st = std::get_if<WireState>(&reply);
    if (!st) throw ConnectionError("controller replied with a non-STATE line");
    last_state_ = *st;
    return *st;
  } catch (const net::SocketError& e) {
    {
      std::lock_guard lock(fd_mu_);
      fd_ = -1;
    }
    socket_.close();
    throw ConnectionError(e.what());
  } catch (const WireParseError& e) {
    throw ConnectionError(fmt::format("garbled controller reply: {}", e.what()));
  }
}

void TcpWireDriver::send_command(const WireCommand& command) { request(command); }

WireState TcpWireDriver::read_state() { return request(PollRequest{++poll_seq_}); }

void TcpWireDriver::send_gripper(bool closed, uint64_t seq) { request(GripRequest{closed, seq}); }

}  // namespace teleop::robot
