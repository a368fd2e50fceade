#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace teleop::net {

class SocketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Owning wrapper around a POSIX stream socket with line-oriented reads.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(o.fd_), buffer_(std::move(o.buffer_)) { o.fd_ = -1; }
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  /// Connects with TCP_NODELAY set. Throws SocketError.
  static Socket connect_tcp(const std::string& host, uint16_t port);
  /// Binds and listens. Port 0 picks an ephemeral port. Throws SocketError
  /// naming the address on failure.
  static Socket listen_tcp(const std::string& host, uint16_t port);

  /// Waits up to timeout for a pending connection.
  std::optional<Socket> accept(std::chrono::milliseconds timeout);
  uint16_t local_port() const;

  void write_all(std::string_view data);
  /// Returns nullopt on timeout; throws SocketError on EOF or error.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);

  /// Unblocks a reader in another thread; the socket stays owned.
  void shutdown();
  void close();
  bool is_open() const { return fd_ >= 0; }
  int fd() const { return fd_; }

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace teleop::net
