#include "teleop/orchestrator/phone_client.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/executor_work_guard.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>

#include "teleop/bus.hpp"
#include "teleop/protocol.hpp"
#include "teleop/topics.hpp"

namespace teleop {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct PhoneClient::Impl {
  asio::io_context ioc;
  asio::executor_work_guard<asio::io_context::executor_type> work{ioc.get_executor()};
  websocket::stream<beast::tcp_stream> ws{ioc};
  beast::flat_buffer buffer;
  std::thread thread;

  // I/O thread only.
  std::deque<std::string> outbox;
  bool closing = false;

  std::atomic<uint64_t> sent{0};
  mutable std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> inbox;
  bool is_open = false;
  bool flushed = false;

  void do_read() {
    ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
      if (ec) {
        mark_closed();
        return;
      }
      {
        std::lock_guard lock(mu);
        inbox.push_back(beast::buffers_to_string(buffer.data()));
      }
      buffer.consume(buffer.size());
      cv.notify_all();
      do_read();
    });
  }

  void enqueue(std::string text) {
    asio::post(ioc, [this, text = std::move(text)]() mutable {
      if (closing) return;
      outbox.push_back(std::move(text));
      if (outbox.size() == 1) do_write();
    });
  }

  void do_write() {
    ws.async_write(asio::buffer(outbox.front()), [this](beast::error_code ec, std::size_t) {
      if (ec) {
        outbox.clear();
        mark_closed();
        return;
      }
      outbox.pop_front();
      if (!outbox.empty()) {
        do_write();
      } else if (closing) {
        do_close();
      }
    });
  }

  void do_close() {
    ws.async_close(websocket::close_code::normal, [this](beast::error_code) {
      mark_closed();
      // The pending read completes with an error once the close finishes.
      beast::error_code ignored;
      beast::get_lowest_layer(ws).socket().close(ignored);
    });
  }

  void mark_closed() {
    {
      std::lock_guard lock(mu);
      is_open = false;
      flushed = true;
    }
    cv.notify_all();
  }
};

PhoneClient::PhoneClient(std::string host, uint16_t port, std::string ns, std::string frame_id)
    : host_(std::move(host)),
      port_(port),
      ns_(normalize_namespace(ns)),
      frame_id_(std::move(frame_id)),
      impl_(std::make_unique<Impl>()) {}

PhoneClient::~PhoneClient() {
  try {
    close();
  } catch (...) {
  }
}

std::string PhoneClient::topic(std::string_view base) const { return TopicName(ns_, base).full(); }

void PhoneClient::connect(std::chrono::milliseconds timeout) {
  if (impl_->thread.joinable()) throw std::logic_error("phone client already connected");
  try {
    tcp::resolver resolver(impl_->ioc);
    const auto endpoints = resolver.resolve(host_, std::to_string(port_));
    auto& stream = beast::get_lowest_layer(impl_->ws);
    stream.expires_after(timeout);
    stream.connect(endpoints);
    stream.expires_never();
    websocket::stream_base::timeout opts = websocket::stream_base::timeout::suggested(beast::role_type::client);
    opts.handshake_timeout = timeout;
    impl_->ws.set_option(opts);
    impl_->ws.text(true);
    impl_->ws.handshake(fmt::format("{}:{}", host_, port_), "/");
  } catch (const beast::system_error& e) {
    throw std::runtime_error(fmt::format("cannot connect to ws://{}:{}: {}", host_, port_, e.what()));
  }
  {
    std::lock_guard lock(impl_->mu);
    impl_->is_open = true;
  }
  impl_->do_read();
  impl_->thread = std::thread([this] { impl_->ioc.run(); });

  send_raw(protocol::advertise_frame(topic(topics::kPhonePose), "geometry_msgs/PoseStamped"));
  send_raw(protocol::advertise_frame(topic(topics::kButton), "phone2act/ButtonEvent"));
}

void PhoneClient::close() {
  if (!impl_->thread.joinable()) return;
  asio::post(impl_->ioc, [impl = impl_.get()] {
    if (impl->closing) return;
    impl->closing = true;
    bool open;
    {
      std::lock_guard lock(impl->mu);
      open = impl->is_open;
    }
    if (!open) {
      impl->mark_closed();
    } else if (impl->outbox.empty()) {
      impl->do_close();
    }
  });
  {
    std::unique_lock lock(impl_->mu);
    impl_->cv.wait_for(lock, std::chrono::seconds(5), [&] { return impl_->flushed; });
  }
  impl_->work.reset();
  impl_->ioc.stop();
  impl_->thread.join();
}

bool PhoneClient::open() const {
  std::lock_guard lock(impl_->mu);
  return impl_->is_open;
}

void PhoneClient::send_raw(std::string text) {
  if (!impl_->thread.joinable()) throw std::logic_error("phone client is not connected");
  impl_->sent.fetch_add(1);
  impl_->enqueue(std::move(text));
}

void PhoneClient::send_pose(Vec3 position, const Quat& orientation, double stamp_ms) {
  PoseSample p;
  p.stamp_ms = stamp_ms;
  p.position = position;
  p.orientation = orientation;
  p.frame_id = frame_id_;
  send_raw(protocol::publish_frame(topic(topics::kPhonePose), protocol::encode_pose(p)));
}

void PhoneClient::press(Button button, double stamp_ms) {
  send_raw(protocol::publish_frame(topic(topics::kButton),
                                   protocol::encode_button(ButtonEvent{button, stamp_ms})));
}

void PhoneClient::recorder(RecorderAction action, const std::string& task) {
  const Payload cmd = RecorderCommand{action, task};
  nlohmann::json msg = protocol::encode_payload(cmd, Nanos{0});
  msg.erase("bus_stamp");
  send_raw(protocol::publish_frame(topic(topics::kRecorderControl), msg));
}

void PhoneClient::subscribe(const std::string& base) { send_raw(protocol::subscribe_frame(topic(base))); }

std::optional<nlohmann::json> PhoneClient::next_message(std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait_for(lock, timeout, [&] { return !impl_->inbox.empty() || !impl_->is_open; });
  if (impl_->inbox.empty()) return std::nullopt;
  std::string text = std::move(impl_->inbox.front());
  impl_->inbox.pop_front();
  lock.unlock();
  return nlohmann::json::parse(text, nullptr, false);
}

uint64_t PhoneClient::frames_sent() const { return impl_->sent.load(); }

}  // namespace teleop
