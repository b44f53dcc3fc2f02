#pragma once

#include "semcast/clock.hpp"
#include "semcast/transport/broker.hpp"
#include "semcast/transport/mqtt_codec.hpp"
#include "semcast/transport/socket.hpp"
#include "semcast/transport/timing.hpp"

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

namespace semcast::transport {

struct MqttOptions {
  std::string host = "127.0.0.1";
  int port = 1883;
  std::string client_id = "semcast-gateway";
  std::chrono::milliseconds timeout{2000};
  std::uint16_t keep_alive_s = 30;
};

/// Blocking MQTT 3.1.1 client (QoS 0 and 1). A reader thread dispatches
/// inbound PUBLISH packets to subscriptions and collects acknowledgements.
/// For QoS 1 the receipt's t_recv is t_send plus half the PUBACK round trip.
class MqttClient final : public Broker {
 public:
  explicit MqttClient(MqttOptions options, const Clock& clock = steady_clock_instance())
      : options_(std::move(options)), clock_(clock) {
    sock_ = connect_tcp(options_.host, options_.port, options_.timeout);
    sock_.send_all(mqtt::encode_connect(options_.client_id, options_.keep_alive_s));
    const auto connack = read_one_blocking();
    if (!connack || connack->type != mqtt::kConnack) throw Error(Errc::BrokerUnavailable, "no CONNACK from broker");
    if (const auto rc = mqtt::parse_connack_code(*connack); rc != 0) {
      throw Error(Errc::BrokerUnavailable, "broker refused connection, code " + std::to_string(rc));
    }
    alive_ = true;
    reader_ = std::thread([this] { reader_loop(); });
  }

  ~MqttClient() override {
    if (alive_) {
      try {
        std::lock_guard lock(write_mutex_);
        sock_.send_all(mqtt::encode_disconnect());
      } catch (const Error&) {
      }
    }
    sock_.shutdown();
    if (reader_.joinable()) reader_.join();
  }

  MqttClient(const MqttClient&) = delete;
  MqttClient& operator=(const MqttClient&) = delete;

  void set_clock_offset(ClockOffset offset) {
    std::lock_guard lock(state_mutex_);
    offset_ = offset;
  }

  ChannelReceipt publish(const std::string& topic, std::string_view payload, int qos) override {
    if (qos != 0 && qos != 1) throw Error(Errc::InvalidArgument, "only qos 0 and 1 are supported");
    if (payload.empty()) throw Error(Errc::InvalidArgument, "empty payload on " + topic);
    if (payload.size() > kDefaultPayloadCap) {
      throw Error(Errc::PayloadTooLarge, topic + ": " + std::to_string(payload.size()) + " bytes");
    }
    const std::uint16_t id = qos > 0 ? next_packet_id() : 0;
    const Micros t_send = synced_now();
    send(mqtt::encode_publish(topic, payload, qos, id));
    Micros t_recv = t_send;
    if (qos > 0) {
      wait_for_ack(id);
      const Millis rtt = std::chrono::duration_cast<Millis>(synced_now() - t_send);
      t_recv = t_send + std::chrono::duration_cast<Micros>(one_way_latency(rtt));
    }
    return {topic, payload.size(), t_send, t_recv, direction_of_topic(topic)};
  }

  std::shared_ptr<Subscription> subscribe(const std::string& filter) override {
    auto sub = std::make_shared<Subscription>(filter);
    {
      std::lock_guard lock(state_mutex_);
      subscriptions_.push_back(sub);
    }
    const auto id = next_packet_id();
    send(mqtt::encode_subscribe(id, filter, 1));
    wait_for_ack(id);
    return sub;
  }

  bool connected() const { return alive_; }

 private:
  static const Clock& steady_clock_instance() {
    static SteadyClock clock;
    return clock;
  }

  Micros synced_now() const {
    std::lock_guard lock(state_mutex_);
    return offset_.to_remote(clock_.now());
  }

  std::uint16_t next_packet_id() {
    std::lock_guard lock(state_mutex_);
    if (++packet_id_ == 0) packet_id_ = 1;
    return packet_id_;
  }

  void send(const std::string& bytes) {
    if (!alive_) throw Error(Errc::BrokerUnavailable, "connection to broker lost");
    std::lock_guard lock(write_mutex_);
    sock_.send_all(bytes);
  }

  void wait_for_ack(std::uint16_t id) {
    std::unique_lock lock(state_mutex_);
    const bool ok = acked_.wait_for(lock, options_.timeout, [&] { return acks_.count(id) > 0 || !alive_; });
    if (!ok || !acks_.count(id)) throw Error(Errc::BrokerUnavailable, "no acknowledgement for packet " + std::to_string(id));
    acks_.erase(id);
  }

  std::optional<mqtt::Packet> read_one_blocking() {
    char buf[4096];
    pollfd pfd{sock_.fd(), POLLIN, 0};
    while (true) {
      if (auto p = reader_state_.next()) return p;
      if (::poll(&pfd, 1, static_cast<int>(options_.timeout.count())) != 1) return std::nullopt;
      const auto n = sock_.recv_some(buf, sizeof buf);
      if (n == 0) return std::nullopt;
      reader_state_.feed({buf, n});
    }
  }

  void reader_loop() {
    char buf[8192];
    try {
      while (true) {
        while (auto p = reader_state_.next()) dispatch(*p);
        const auto n = sock_.recv_some(buf, sizeof buf);
        if (n == 0) break;
        reader_state_.feed({buf, n});
      }
    } catch (const Error&) {
    }
    alive_ = false;
    acked_.notify_all();
  }

  void dispatch(const mqtt::Packet& p) {
    switch (p.type) {
      case mqtt::kPublish: {
        auto pub = mqtt::parse_publish(p);
        if (pub.qos == 1) send(mqtt::encode_puback(pub.packet_id));
        const Micros now = synced_now();
        std::vector<std::shared_ptr<Subscription>> targets;
        {
          std::lock_guard lock(state_mutex_);
          for (const auto& s : subscriptions_)
            if (topic_matches(s->filter(), pub.topic)) targets.push_back(s);
        }
        for (const auto& s : targets) s->push({pub.topic, pub.payload, now, now, inbound_sequence_});
        ++inbound_sequence_;
        break;
      }
      case mqtt::kPuback:
      case mqtt::kSuback: {
        const auto id = mqtt::parse_packet_id(p);
        {
          std::lock_guard lock(state_mutex_);
          acks_.insert(id);
        }
        acked_.notify_all();
        break;
      }
      default: break;
    }
  }

  MqttOptions options_;
  const Clock& clock_;
  Socket sock_;
  mqtt::PacketReader reader_state_;
  std::thread reader_;
  std::atomic<bool> alive_{false};
  std::mutex write_mutex_;
  mutable std::mutex state_mutex_;
  std::condition_variable acked_;
  std::set<std::uint16_t> acks_;
  std::vector<std::shared_ptr<Subscription>> subscriptions_;
  std::uint16_t packet_id_ = 0;
  std::uint64_t inbound_sequence_ = 0;
  ClockOffset offset_;
};

}  // namespace semcast::transport
