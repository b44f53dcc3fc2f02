#pragma once

#include "semcast/clock.hpp"
#include "semcast/error.hpp"
#include "semcast/transport/metering.hpp"
#include "semcast/transport/topics.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace semcast::transport {

inline constexpr std::size_t kDefaultPayloadCap = 256 * 1024;

struct Message {
  std::string topic;
  std::string payload;
  Micros t_send{0};
  Micros t_recv{0};
  std::uint64_t sequence = 0;  // per-broker publish order
};

/// Single-consumer ordered stream of messages for one topic filter.
class Subscription {
 public:
  explicit Subscription(std::string filter) : filter_(std::move(filter)) {}

  const std::string& filter() const { return filter_; }

  void push(Message m) {
    {
      std::lock_guard lock(mutex_);
      if (closed_) return;
      queue_.push_back(std::move(m));
    }
    ready_.notify_one();
  }

  std::optional<Message> try_pop() {
    std::lock_guard lock(mutex_);
    if (queue_.empty()) return std::nullopt;
    Message m = std::move(queue_.front());
    queue_.pop_front();
    return m;
  }

  std::optional<Message> pop(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    if (!ready_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; })) return std::nullopt;
    if (queue_.empty()) return std::nullopt;
    Message m = std::move(queue_.front());
    queue_.pop_front();
    return m;
  }

  std::size_t pending() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_all();
  }

 private:
  std::string filter_;
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<Message> queue_;
  bool closed_ = false;
};

class Broker {
 public:
  virtual ~Broker() = default;
  virtual ChannelReceipt publish(const std::string& topic, std::string_view payload, int qos) = 0;
  virtual std::shared_ptr<Subscription> subscribe(const std::string& filter) = 0;
};

/// In-process broker on an injectable clock. Each publish is delivered at
/// once with t_recv = t_send + the delay of the first matching link.
class LoopbackBroker final : public Broker {
 public:
  explicit LoopbackBroker(const Clock& clock, std::size_t payload_cap = kDefaultPayloadCap)
      : clock_(clock), payload_cap_(payload_cap) {}

  void set_link_delay(std::string filter, Micros delay) {
    std::lock_guard lock(mutex_);
    links_.emplace_back(std::move(filter), delay);
  }

  void set_available(bool up) { available_ = up; }

  ChannelReceipt publish(const std::string& topic, std::string_view payload, int qos) override {
    if (!available_) throw Error(Errc::BrokerUnavailable, "loopback broker is down");
    if (payload.empty()) throw Error(Errc::InvalidArgument, "empty payload on " + topic);
    if (payload.size() > payload_cap_) {
      throw Error(Errc::PayloadTooLarge, topic + ": " + std::to_string(payload.size()) + " bytes");
    }
    if (qos < 0 || qos > 2) throw Error(Errc::InvalidArgument, "qos must be 0, 1 or 2");
    std::lock_guard lock(mutex_);
    Message m{topic, std::string(payload), clock_.now(), Micros{0}, next_sequence_++};
    m.t_recv = m.t_send + delay_for(topic);
    for (const auto& sub : subscriptions_)
      if (topic_matches(sub->filter(), topic)) sub->push(m);
    return {topic, payload.size(), m.t_send, m.t_recv, direction_of_topic(topic)};
  }

  std::shared_ptr<Subscription> subscribe(const std::string& filter) override {
    if (!available_) throw Error(Errc::BrokerUnavailable, "loopback broker is down");
    auto sub = std::make_shared<Subscription>(filter);
    std::lock_guard lock(mutex_);
    subscriptions_.push_back(sub);
    return sub;
  }

 private:
  Micros delay_for(const std::string& topic) const {
    for (const auto& [filter, delay] : links_)
      if (topic_matches(filter, topic)) return delay;
    return Micros{0};
  }

  const Clock& clock_;
  std::size_t payload_cap_;
  std::atomic<bool> available_{true};
  std::mutex mutex_;
  std::vector<std::pair<std::string, Micros>> links_;
  std::vector<std::shared_ptr<Subscription>> subscriptions_;
  std::uint64_t next_sequence_ = 0;
};

}  // namespace semcast::transport
