#include "teleop/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleop/protocol.hpp"
#include "teleop/topics.hpp"

namespace teleop {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

RateMonitor::RateMonitor(Nanos nominal_period, std::size_t window)
    : nominal_(nominal_period), window_(std::max<std::size_t>(window, 2)) {}

void RateMonitor::record(Nanos arrival) {
  arrivals_.push_back(arrival);
  while (arrivals_.size() > window_) arrivals_.pop_front();
}

RateReport RateMonitor::report() const {
  RateReport r;
  r.samples = arrivals_.size();
  if (arrivals_.size() < 2) return r;
  const std::size_t n = arrivals_.size() - 1;
  double sum = 0.0;
  double sum_sq = 0.0;
  const double nominal_ms = std::chrono::duration<double, std::milli>(nominal_).count();
  for (std::size_t i = 1; i < arrivals_.size(); ++i) {
    const double gap = std::chrono::duration<double, std::milli>(arrivals_[i] - arrivals_[i - 1]).count();
    sum += gap;
    sum_sq += gap * gap;
    const double periods = std::round(gap / nominal_ms);
    if (periods > 1.0) r.drop_estimate += static_cast<uint64_t>(periods) - 1;
  }
  r.mean_interval_ms = sum / static_cast<double>(n);
  r.jitter_ms = std::sqrt(std::max(0.0, sum_sq / static_cast<double>(n) -
                                            r.mean_interval_ms * r.mean_interval_ms));
  return r;
}

class Session;

struct Gateway::Impl {
  Impl(Bus& b, GatewayConfig c) : bus(b), config(std::move(c)) {}

  Bus& bus;
  GatewayConfig config;
  asio::io_context ioc;
  std::optional<tcp::acceptor> acceptor;
  std::optional<asio::steady_timer> forward_timer;
  std::thread io_thread;
  uint16_t port = 0;
  bool running = false;

  // io thread only
  std::map<uint64_t, std::weak_ptr<Session>> sessions;
  uint64_t next_id = 1;

  mutable std::mutex mu;
  mutable std::condition_variable cv;
  uint64_t processed = 0;
  uint64_t rejected = 0;
  std::size_t handshakes = 0;
  std::map<uint64_t, ConnectionInfo> infos;

  void do_accept();
  void schedule_forward();

  void count_frame(uint64_t id, bool ok) {
    {
      std::lock_guard lock(mu);
      ++processed;
      auto& info = infos[id];
      if (ok) {
        ++info.accepted;
      } else {
        ++rejected;
        ++info.rejected;
      }
    }
    cv.notify_all();
  }
};

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, Gateway::Impl& gw, uint64_t id)
      : ws_(std::move(socket)),
        gw_(gw),
        id_(id),
        rate_(gw.config.nominal_pose_period, gw.config.rate_window) {}

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(gw_.config.max_frame_bytes);
    ws_.async_accept(beast::bind_front_handler(&Session::on_accept, shared_from_this()));
  }

  void forward() {
    for (auto& [name, sub] : forwards_) {
      for (const Envelope& e : sub.drain()) {
        send(protocol::publish_frame(name, protocol::encode_payload(e.payload, e.publish_time)));
      }
    }
  }

  void shutdown() {
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    gw_.sessions[id_] = weak_from_this();
    {
      std::lock_guard lock(gw_.mu);
      gw_.infos[id_].id = id_;
      ++gw_.handshakes;
    }
    gw_.cv.notify_all();
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Session::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    if (!ws_.got_text()) {
      send(protocol::error_frame("binary frames are not supported"));
      gw_.count_frame(id_, false);
    } else {
      handle(beast::buffers_to_string(buffer_.data()));
    }
    buffer_.consume(buffer_.size());
    do_read();
  }

  void send(std::string text) {
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) do_write();
  }

  void do_write() {
    ws_.async_write(asio::buffer(outbox_.front()),
                    beast::bind_front_handler(&Session::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      outbox_.clear();
      return;
    }
    outbox_.pop_front();
    if (!outbox_.empty()) do_write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    forwards_.clear();
    for (const std::string& ns : namespaces_) {
      try {
        gw_.bus.publish(TopicName(ns, topics::kConnection), ConnectionEvent{false, id_});
      } catch (const BusError& e) {
        spdlog::warn("gateway: {}", e.what());
      }
    }
    gw_.sessions.erase(id_);
  }

  void attach_namespace(const TopicName& t) {
    if (namespaces_.insert(t.ns()).second) {
      gw_.bus.publish(TopicName(t.ns(), topics::kConnection), ConnectionEvent{true, id_});
    }
  }

  PayloadKind advertise(const TopicName& t, const std::optional<std::string>& type) {
    const auto kind = protocol::client_kind(t, type);
    if (!kind) throw protocol::DecodeError("topic " + t.full() + " is not writable by clients");
    gw_.bus.advertise(t, *kind);
    const std::string full = t.full();
    if (advertised_.emplace(full, *kind).second) {
      std::lock_guard lock(gw_.mu);
      gw_.infos[id_].advertised.push_back(full);
    }
    attach_namespace(t);
    return *kind;
  }

  void handle(const std::string& text) {
    std::optional<std::string> id;
    try {
      const protocol::WireMessage m = protocol::parse_frame(text);
      id = m.id;
      TopicName topic = [&] {
        try {
          return TopicName::parse(m.topic);
        } catch (const std::invalid_argument& e) {
          throw protocol::DecodeError(e.what());
        }
      }();
      const std::string full = topic.full();
      switch (m.op) {
        case protocol::Op::advertise:
          advertise(topic, m.type);
          break;
        case protocol::Op::publish: {
          auto it = advertised_.find(full);
          const PayloadKind kind = it != advertised_.end() ? it->second : advertise(topic, m.type);
          publish(topic, kind, m.msg);
          break;
        }
        case protocol::Op::subscribe:
          if (std::none_of(forwards_.begin(), forwards_.end(),
                           [&](const auto& f) { return f.first == full; })) {
            forwards_.emplace_back(full, gw_.bus.subscribe(topic, QosProfile::keep_last(8)));
          }
          break;
        case protocol::Op::unsubscribe:
          std::erase_if(forwards_, [&](const auto& f) { return f.first == full; });
          break;
      }
    } catch (const std::exception& e) {
      // DecodeError, DomainError, BusError: all per-frame rejections.
      send(protocol::error_frame(e.what(), id));
      gw_.count_frame(id_, false);
      return;
    }
    gw_.count_frame(id_, true);
  }

  void publish(const TopicName& topic, PayloadKind kind, const nlohmann::json& msg) {
    switch (kind) {
      case PayloadKind::pose: {
        PoseSample p = protocol::decode_pose(msg);
        auto& last = last_pose_stamp_[topic.full()];
        if (last && p.stamp_ms < *last) {
          throw protocol::DecodeError(
              fmt::format("pose stamp {} went backwards (previous {})", p.stamp_ms, *last));
        }
        last = p.stamp_ms;
        gw_.bus.publish(topic, std::move(p));
        rate_.record(gw_.bus.clock().now());
        std::lock_guard lock(gw_.mu);
        gw_.infos[id_].pose_rate = rate_.report();
        break;
      }
      case PayloadKind::button:
        gw_.bus.publish(topic, protocol::decode_button(msg));
        break;
      case PayloadKind::recorder_command:
        gw_.bus.publish(topic, protocol::decode_recorder_command(msg));
        break;
      default:
        throw protocol::DecodeError("topic " + topic.full() + " is not writable by clients");
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  Gateway::Impl& gw_;
  uint64_t id_;
  bool closed_ = false;
  RateMonitor rate_;
  std::map<std::string, PayloadKind> advertised_;
  std::set<std::string> namespaces_;
  std::map<std::string, std::optional<double>> last_pose_stamp_;
  std::vector<std::pair<std::string, Subscription>> forwards_;
};

void Gateway::Impl::do_accept() {
  acceptor->async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<Session>(std::move(socket), *this, next_id++)->run();
    do_accept();
  });
}

void Gateway::Impl::schedule_forward() {
  forward_timer->expires_after(config.forward_interval);
  forward_timer->async_wait([this](beast::error_code ec) {
    if (ec) return;
    for (auto& [id, weak] : sessions) {
      if (auto s = weak.lock()) s->forward();
    }
    schedule_forward();
  });
}

Gateway::Gateway(Bus& bus, GatewayConfig config)
    : impl_(std::make_unique<Impl>(bus, std::move(config))) {}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  auto& im = *impl_;
  try {
    const auto addr = asio::ip::make_address(im.config.bind_address);
    tcp::endpoint ep(addr, im.config.port);
    im.acceptor.emplace(im.ioc);
    im.acceptor->open(ep.protocol());
    im.acceptor->set_option(asio::socket_base::reuse_address(true));
    im.acceptor->bind(ep);
    im.acceptor->listen();
  } catch (const std::exception& e) {
    im.acceptor.reset();
    throw StartupError(fmt::format("gateway port {}: {}", im.config.port, e.what()));
  }
  im.port = im.acceptor->local_endpoint().port();
  im.forward_timer.emplace(im.ioc);
  im.do_accept();
  im.schedule_forward();
  im.running = true;
  im.io_thread = std::thread([&im] { im.ioc.run(); });
}

void Gateway::stop() {
  auto& im = *impl_;
  if (!im.running) return;
  im.running = false;
  asio::post(im.ioc, [&im] {
    beast::error_code ec;
    im.acceptor->close(ec);
    im.forward_timer->cancel();
    for (auto& [id, weak] : im.sessions) {
      if (auto s = weak.lock()) s->shutdown();
    }
  });
  // Let the sessions observe their shutdown, then stop regardless.
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  im.ioc.stop();
  if (im.io_thread.joinable()) im.io_thread.join();
}

uint16_t Gateway::port() const { return impl_->port; }

uint64_t Gateway::frames_processed() const {
  std::lock_guard lock(impl_->mu);
  return impl_->processed;
}

uint64_t Gateway::frames_rejected() const {
  std::lock_guard lock(impl_->mu);
  return impl_->rejected;
}

bool Gateway::wait_processed(uint64_t count, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(impl_->mu);
  return impl_->cv.wait_for(lock, timeout, [&] { return impl_->processed >= count; });
}

bool Gateway::wait_connections(std::size_t n, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(impl_->mu);
  return impl_->cv.wait_for(lock, timeout, [&] { return impl_->handshakes >= n; });
}

std::vector<ConnectionInfo> Gateway::connections() const {
  std::lock_guard lock(impl_->mu);
  std::vector<ConnectionInfo> out;
  for (const auto& [id, info] : impl_->infos) out.push_back(info);
  return out;
}

}  // namespace teleop
