#include "teleop/bus.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <span>

namespace teleop {

namespace {

std::vector<std::string_view> split_segments(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t j = s.find('/', i);
    const std::size_t end = j == std::string_view::npos ? s.size() : j;
    if (end > i) out.push_back(s.substr(i, end - i));
    i = end + 1;
  }
  return out;
}

std::string join(std::span<const std::string_view> parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '/';
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string normalize_namespace(std::string_view ns) {
  const auto segs = split_segments(ns);
  if (segs.empty()) return {};
  return "/" + join(segs);
}

TopicName::TopicName(std::string_view ns, std::string_view base)
    : ns_(normalize_namespace(ns)), base_(join(split_segments(base))) {
  if (base_.empty()) throw std::invalid_argument("topic base name must be nonempty");
}

TopicName TopicName::parse(std::string_view full) {
  const auto segs = split_segments(full);
  if (segs.empty()) throw std::invalid_argument("empty topic name");
  const auto it = std::find(segs.begin(), segs.end(), std::string_view("phone2act"));
  const std::span<const std::string_view> all(segs);
  const auto cut = static_cast<std::size_t>(it == segs.end() ? 0 : it - segs.begin());
  return TopicName(join(all.first(cut)), join(all.subspan(cut)));
}

std::string TopicName::full() const { return ns_ + "/" + base_; }

std::string_view to_string(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::pose: return "pose";
    case PayloadKind::button: return "button";
    case PayloadKind::target: return "target_pose";
    case PayloadKind::gripper: return "gripper_command";
    case PayloadKind::robot_state: return "robot_state";
    case PayloadKind::camera_frame: return "camera_frame";
    case PayloadKind::health: return "health";
    case PayloadKind::planner_status: return "planner_status";
    case PayloadKind::recorder_command: return "recorder_command";
    case PayloadKind::recorder_status: return "recorder_status";
    case PayloadKind::connection: return "connection";
  }
  return "unknown";
}

namespace detail {

struct SubscriptionQueue {
  SubscriptionQueue(TopicName t, QosProfile q) : topic(std::move(t)), qos(q) {}

  TopicName topic;
  QosProfile qos;
  mutable std::mutex mu;
  std::condition_variable cv;
  std::deque<Envelope> items;
  uint64_t evicted = 0;

  // Returns false only for a full reliable queue.
  bool push(const Envelope& e) {
    {
      std::lock_guard lock(mu);
      if (items.size() >= qos.depth) {
        if (qos.reliability == Reliability::reliable) return false;
        items.pop_front();
        ++evicted;
      }
      items.push_back(e);
    }
    cv.notify_one();
    return true;
  }
};

struct TopicState {
  std::optional<PayloadKind> kind;
  uint64_t sequence = 0;
  std::optional<Envelope> latest;
  std::vector<std::weak_ptr<SubscriptionQueue>> subscribers;
};

struct BusCore {
  mutable std::mutex mu;
  std::map<std::string, TopicState> topics;
  uint64_t order = 0;

  TopicState& bind(const TopicName& topic, std::optional<PayloadKind> kind) {
    TopicState& st = topics[topic.full()];
    if (kind) {
      if (!st.kind) {
        st.kind = kind;
      } else if (*st.kind != *kind) {
        throw TypeMismatchError("topic " + topic.full() + " carries " +
                                std::string(to_string(*st.kind)) + ", not " +
                                std::string(to_string(*kind)));
      }
    }
    return st;
  }

  void remove(const SubscriptionQueue* q) {
    std::lock_guard lock(mu);
    auto it = topics.find(q->topic.full());
    if (it == topics.end()) return;
    auto& subs = it->second.subscribers;
    std::erase_if(subs, [q](const std::weak_ptr<SubscriptionQueue>& w) {
      auto s = w.lock();
      return !s || s.get() == q;
    });
  }
};

}  // namespace detail

Subscription::Subscription(std::shared_ptr<detail::SubscriptionQueue> q,
                           std::weak_ptr<detail::BusCore> core)
    : queue_(std::move(q)), core_(std::move(core)) {}

Subscription::Subscription(Subscription&& o) noexcept
    : queue_(std::move(o.queue_)), core_(std::move(o.core_)) {}

Subscription& Subscription::operator=(Subscription&& o) noexcept {
  if (this != &o) {
    reset();
    queue_ = std::move(o.queue_);
    core_ = std::move(o.core_);
  }
  return *this;
}

Subscription::~Subscription() { reset(); }

void Subscription::reset() {
  if (!queue_) return;
  if (auto core = core_.lock()) core->remove(queue_.get());
  queue_.reset();
}

std::optional<Envelope> Subscription::poll() {
  std::lock_guard lock(queue_->mu);
  if (queue_->items.empty()) return std::nullopt;
  Envelope e = std::move(queue_->items.front());
  queue_->items.pop_front();
  return e;
}

std::vector<Envelope> Subscription::drain() {
  std::lock_guard lock(queue_->mu);
  std::vector<Envelope> out(std::make_move_iterator(queue_->items.begin()),
                            std::make_move_iterator(queue_->items.end()));
  queue_->items.clear();
  return out;
}

std::optional<Envelope> Subscription::wait(std::chrono::milliseconds timeout) {
  std::unique_lock lock(queue_->mu);
  if (!queue_->cv.wait_for(lock, timeout, [&] { return !queue_->items.empty(); })) {
    return std::nullopt;
  }
  Envelope e = std::move(queue_->items.front());
  queue_->items.pop_front();
  return e;
}

std::size_t Subscription::clear() {
  std::lock_guard lock(queue_->mu);
  const std::size_t n = queue_->items.size();
  queue_->items.clear();
  return n;
}

std::size_t Subscription::pending() const {
  std::lock_guard lock(queue_->mu);
  return queue_->items.size();
}

uint64_t Subscription::evicted() const {
  std::lock_guard lock(queue_->mu);
  return queue_->evicted;
}

const TopicName& Subscription::topic() const { return queue_->topic; }

Bus::Bus(const Clock& clock) : clock_(clock), core_(std::make_shared<detail::BusCore>()) {}

Bus::~Bus() = default;

void Bus::advertise(const TopicName& topic, PayloadKind kind) {
  std::lock_guard lock(core_->mu);
  core_->bind(topic, kind);
}

uint64_t Bus::publish(const TopicName& topic, Payload payload) {
  const auto kind = static_cast<PayloadKind>(payload.index());
  std::vector<std::string> overflowed;
  uint64_t seq = 0;
  {
    std::lock_guard lock(core_->mu);
    detail::TopicState& st = core_->bind(topic, kind);
    seq = ++st.sequence;
    Envelope env{topic, clock_.now(), seq, ++core_->order, std::move(payload)};
    for (auto& w : st.subscribers) {
      if (auto q = w.lock()) {
        if (!q->push(env)) overflowed.push_back(q->topic.full());
      }
    }
    st.latest = std::move(env);
  }
  if (!overflowed.empty()) {
    throw QueueOverflowError("reliable subscription full on " + topic.full());
  }
  return seq;
}

Subscription Bus::subscribe(const TopicName& topic, QosProfile qos,
                            std::optional<PayloadKind> kind) {
  if (qos.depth < 1) throw std::invalid_argument("QoS depth must be >= 1");
  auto q = std::make_shared<detail::SubscriptionQueue>(topic, qos);
  std::lock_guard lock(core_->mu);
  detail::TopicState& st = core_->bind(topic, kind);
  std::erase_if(st.subscribers, [](const auto& w) { return w.expired(); });
  if (qos.exclusive) {
    for (auto& w : st.subscribers) {
      if (auto other = w.lock(); other && other->qos.exclusive) {
        throw ConflictError("exclusive subscription already held on " + topic.full());
      }
    }
  }
  st.subscribers.push_back(q);
  return Subscription(std::move(q), core_);
}

std::optional<Envelope> Bus::latest(const TopicName& topic) const {
  std::lock_guard lock(core_->mu);
  auto it = core_->topics.find(topic.full());
  if (it == core_->topics.end()) return std::nullopt;
  return it->second.latest;
}

std::optional<PayloadKind> Bus::kind_of(const TopicName& topic) const {
  std::lock_guard lock(core_->mu);
  auto it = core_->topics.find(topic.full());
  if (it == core_->topics.end()) return std::nullopt;
  return it->second.kind;
}

std::vector<std::string> Bus::topics() const {
  std::lock_guard lock(core_->mu);
  std::vector<std::string> out;
  for (const auto& [name, st] : core_->topics) out.push_back(name);
  return out;
}

}  // namespace teleop
