#pragma once

#include "semcast/error.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

// MQTT 3.1.1 control packets, just the subset a pub/sub gateway needs.
namespace semcast::transport::mqtt {

enum PacketType : std::uint8_t {
  kConnect = 1,
  kConnack = 2,
  kPublish = 3,
  kPuback = 4,
  kSubscribe = 8,
  kSuback = 9,
  kPingreq = 12,
  kPingresp = 13,
  kDisconnect = 14,
};

inline constexpr std::size_t kMaxRemainingLength = 268'435'455;

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v & 0xFF));
}

inline void put_str(std::string& out, std::string_view s) {
  if (s.size() > 0xFFFF) throw Error(Errc::ProtocolError, "string longer than 65535 bytes");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.append(s);
}

inline void put_remaining_length(std::string& out, std::size_t n) {
  if (n > kMaxRemainingLength) throw Error(Errc::PayloadTooLarge, "packet exceeds MQTT remaining-length limit");
  do {
    std::uint8_t byte = n % 128;
    n /= 128;
    if (n > 0) byte |= 0x80;
    out.push_back(static_cast<char>(byte));
  } while (n > 0);
}

inline std::string frame(std::uint8_t type, std::uint8_t flags, std::string_view body) {
  std::string out;
  out.push_back(static_cast<char>((type << 4) | (flags & 0x0F)));
  put_remaining_length(out, body.size());
  out.append(body);
  return out;
}

inline std::string encode_connect(std::string_view client_id, std::uint16_t keep_alive_s = 30) {
  std::string body;
  put_str(body, "MQTT");
  body.push_back(4);     // protocol level 3.1.1
  body.push_back(0x02);  // clean session
  put_u16(body, keep_alive_s);
  put_str(body, client_id);
  return frame(kConnect, 0, body);
}

inline std::string encode_connack(std::uint8_t return_code) {
  return frame(kConnack, 0, std::string{'\0', static_cast<char>(return_code)});
}

inline std::string encode_publish(std::string_view topic, std::string_view payload, int qos,
                                  std::uint16_t packet_id = 0) {
  std::string body;
  put_str(body, topic);
  if (qos > 0) put_u16(body, packet_id);
  body.append(payload);
  return frame(kPublish, static_cast<std::uint8_t>(qos << 1), body);
}

inline std::string encode_puback(std::uint16_t packet_id) {
  std::string body;
  put_u16(body, packet_id);
  return frame(kPuback, 0, body);
}

inline std::string encode_subscribe(std::uint16_t packet_id, std::string_view filter, int qos) {
  std::string body;
  put_u16(body, packet_id);
  put_str(body, filter);
  body.push_back(static_cast<char>(qos));
  return frame(kSubscribe, 0x02, body);
}

inline std::string encode_suback(std::uint16_t packet_id, std::uint8_t granted_qos) {
  std::string body;
  put_u16(body, packet_id);
  body.push_back(static_cast<char>(granted_qos));
  return frame(kSuback, 0, body);
}

inline std::string encode_pingreq() { return frame(kPingreq, 0, {}); }
inline std::string encode_pingresp() { return frame(kPingresp, 0, {}); }
inline std::string encode_disconnect() { return frame(kDisconnect, 0, {}); }

struct Packet {
  std::uint8_t type = 0;
  std::uint8_t flags = 0;
  std::string body;
};

/// Incremental decoder: feed raw stream bytes, pull complete packets.
class PacketReader {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }

  std::optional<Packet> next() {
    if (buffer_.size() < 2) return std::nullopt;
    std::size_t length = 0, multiplier = 1, pos = 1;
    while (true) {
      if (pos >= buffer_.size()) return std::nullopt;
      if (pos > 4) throw Error(Errc::ProtocolError, "remaining length uses more than four bytes");
      const auto byte = static_cast<std::uint8_t>(buffer_[pos++]);
      length += (byte & 0x7F) * multiplier;
      multiplier *= 128;
      if ((byte & 0x80) == 0) break;
    }
    if (buffer_.size() < pos + length) return std::nullopt;
    Packet p;
    p.type = static_cast<std::uint8_t>(buffer_[0]) >> 4;
    p.flags = static_cast<std::uint8_t>(buffer_[0]) & 0x0F;
    p.body = buffer_.substr(pos, length);
    buffer_.erase(0, pos + length);
    return p;
  }

  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

class BodyCursor {
 public:
  explicit BodyCursor(std::string_view body) : body_(body) {}
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>((static_cast<std::uint8_t>(body_[0]) << 8) |
                                              static_cast<std::uint8_t>(body_[1]));
    body_.remove_prefix(2);
    return v;
  }
  std::uint8_t u8() {
    need(1);
    const auto v = static_cast<std::uint8_t>(body_[0]);
    body_.remove_prefix(1);
    return v;
  }
  std::string str() {
    const auto n = u16();
    need(n);
    std::string s(body_.substr(0, n));
    body_.remove_prefix(n);
    return s;
  }
  std::string rest() {
    std::string s(body_);
    body_ = {};
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (body_.size() < n) throw Error(Errc::ProtocolError, "truncated packet body");
  }
  std::string_view body_;
};

struct Publish {
  std::string topic;
  std::string payload;
  int qos = 0;
  std::uint16_t packet_id = 0;
};

inline Publish parse_publish(const Packet& p) {
  if (p.type != kPublish) throw Error(Errc::ProtocolError, "not a PUBLISH packet");
  BodyCursor c(p.body);
  Publish out;
  out.qos = (p.flags >> 1) & 0x03;
  if (out.qos > 2) throw Error(Errc::ProtocolError, "invalid qos");
  out.topic = c.str();
  if (out.qos > 0) out.packet_id = c.u16();
  out.payload = c.rest();
  return out;
}

struct Connect {
  std::string protocol;
  int level = 0;
  std::uint16_t keep_alive = 0;
  std::string client_id;
};

inline Connect parse_connect(const Packet& p) {
  if (p.type != kConnect) throw Error(Errc::ProtocolError, "not a CONNECT packet");
  BodyCursor c(p.body);
  Connect out;
  out.protocol = c.str();
  out.level = c.u8();
  c.u8();  // flags
  out.keep_alive = c.u16();
  out.client_id = c.str();
  return out;
}

struct Subscribe {
  std::uint16_t packet_id = 0;
  std::string filter;
  int qos = 0;
};

inline Subscribe parse_subscribe(const Packet& p) {
  if (p.type != kSubscribe) throw Error(Errc::ProtocolError, "not a SUBSCRIBE packet");
  BodyCursor c(p.body);
  Subscribe out;
  out.packet_id = c.u16();
  out.filter = c.str();
  out.qos = c.u8();
  return out;
}

inline std::uint16_t parse_packet_id(const Packet& p) {
  BodyCursor c(p.body);
  return c.u16();
}

inline std::uint8_t parse_connack_code(const Packet& p) {
  if (p.type != kConnack) throw Error(Errc::ProtocolError, "not a CONNACK packet");
  BodyCursor c(p.body);
  c.u8();
  return c.u8();
}

}  // namespace semcast::transport::mqtt
