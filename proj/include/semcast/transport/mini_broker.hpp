#pragma once

#include "semcast/transport/mqtt_codec.hpp"
#include "semcast/transport/socket.hpp"
#include "semcast/transport/topics.hpp"

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace semcast::transport {

/// Minimal single-process MQTT 3.1.1 broker for local runs and tests.
/// QoS 0/1, no retained messages, no persistence, no authentication.
class MiniBroker {
 public:
  explicit MiniBroker(int port = 0) {
    listener_ = listen_tcp(port, port_);
    acceptor_ = std::thread([this] { accept_loop(); });
  }

  ~MiniBroker() { stop(); }

  MiniBroker(const MiniBroker&) = delete;
  MiniBroker& operator=(const MiniBroker&) = delete;

  int port() const { return port_; }

  std::uint64_t forwarded() const { return forwarded_; }

  void stop() {
    if (stopping_.exchange(true)) return;
    listener_.shutdown();
    if (acceptor_.joinable()) acceptor_.join();
    std::vector<std::thread> workers;
    {
      std::lock_guard lock(mutex_);
      for (auto& s : sessions_) s->sock.shutdown();
      workers.swap(workers_);
    }
    for (auto& w : workers)
      if (w.joinable()) w.join();
    listener_.close();
  }

 private:
  struct Session {
    Socket sock;
    std::mutex write_mutex;
    std::vector<std::pair<std::string, int>> filters;
    std::uint16_t next_id = 0;

    void write(const std::string& bytes) {
      std::lock_guard lock(write_mutex);
      sock.send_all(bytes);
    }
  };

  void accept_loop() {
    while (!stopping_) {
      const int fd = ::accept(listener_.fd(), nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        return;
      }
      auto session = std::make_shared<Session>();
      session->sock = Socket(fd);
      std::lock_guard lock(mutex_);
      if (stopping_) return;
      sessions_.push_back(session);
      workers_.emplace_back([this, session] { serve(session); });
    }
  }

  void serve(const std::shared_ptr<Session>& session) {
    mqtt::PacketReader reader;
    char buf[8192];
    try {
      bool connected = false;
      while (true) {
        while (auto p = reader.next()) {
          if (!connected) {
            const auto c = mqtt::parse_connect(*p);
            const bool ok = c.protocol == "MQTT" && c.level == 4;
            session->write(mqtt::encode_connack(ok ? 0 : 1));
            if (!ok) throw Error(Errc::ProtocolError, "unsupported protocol level");
            connected = true;
            continue;
          }
          handle(*session, *p);
        }
        const auto n = session->sock.recv_some(buf, sizeof buf);
        if (n == 0) break;
        reader.feed({buf, n});
      }
    } catch (const Error&) {
    }
    std::lock_guard lock(mutex_);
    sessions_.remove(session);
  }

  void handle(Session& session, const mqtt::Packet& p) {
    switch (p.type) {
      case mqtt::kPublish: {
        const auto pub = mqtt::parse_publish(p);
        route(pub);
        if (pub.qos == 1) session.write(mqtt::encode_puback(pub.packet_id));
        break;
      }
      case mqtt::kSubscribe: {
        const auto sub = mqtt::parse_subscribe(p);
        const int granted = std::min(sub.qos, 1);
        {
          std::lock_guard lock(mutex_);
          session.filters.emplace_back(sub.filter, granted);
        }
        session.write(mqtt::encode_suback(sub.packet_id, static_cast<std::uint8_t>(granted)));
        break;
      }
      case mqtt::kPingreq: session.write(mqtt::encode_pingresp()); break;
      case mqtt::kDisconnect: throw Error(Errc::ProtocolError, "client disconnected");
      default: break;
    }
  }

  void route(const mqtt::Publish& pub) {
    std::vector<std::pair<std::shared_ptr<Session>, int>> targets;
    {
      std::lock_guard lock(mutex_);
      for (const auto& s : sessions_) {
        int best = -1;
        for (const auto& [filter, qos] : s->filters)
          if (topic_matches(filter, pub.topic)) best = std::max(best, qos);
        if (best >= 0) targets.emplace_back(s, std::min(best, pub.qos));
      }
    }
    for (auto& [s, qos] : targets) {
      std::uint16_t id = 0;
      if (qos > 0) {
        std::lock_guard lock(s->write_mutex);
        if (++s->next_id == 0) s->next_id = 1;
        id = s->next_id;
      }
      try {
        s->write(mqtt::encode_publish(pub.topic, pub.payload, qos, id));
        ++forwarded_;
      } catch (const Error&) {
      }
    }
  }

  Socket listener_;
  int port_ = 0;
  std::thread acceptor_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> forwarded_{0};
  std::mutex mutex_;
  std::list<std::shared_ptr<Session>> sessions_;
  std::vector<std::thread> workers_;
};

}  // namespace semcast::transport
