#pragma once

#include "semcast/clock.hpp"
#include "semcast/http.hpp"
#include "semcast/transport/metering.hpp"
#include "semcast/transport/timing.hpp"
#include "semcast/transport/topics.hpp"
#include "semcast/uplink/packet.hpp"

#include <httplib.h>

#include <functional>

namespace semcast::transport {

inline constexpr std::size_t kMaxAnnotationBytes = 64 * 1024;

using AnnotationHandler = std::function<void(const uplink::AnnotationPacket&)>;

/// Registers POST /v1/annotations. Bodies are canonical packet JSON; the
/// reply is 202 {"accepted":true,"bytes":N}, 400 on a malformed packet and
/// 413 above the size cap.
inline void mount_annotation_route(httplib::Server& server, AnnotationHandler handler) {
  server.Post(std::string(kAnnotationsPath), [handler = std::move(handler)](const httplib::Request& req,
                                                                          httplib::Response& res) {
    if (req.body.size() > kMaxAnnotationBytes) {
      res.status = 413;
      res.set_content(R"({"error":"PayloadTooLarge"})", "application/json");
      return;
    }
    try {
      const auto packet = uplink::decode_packet(req.body);
      handler(packet);
      res.status = 202;
      res.set_content(R"({"accepted":true,"bytes":)" + std::to_string(req.body.size()) + "}", "application/json");
    } catch (const Error& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", std::string(to_string(e.code()))}}.dump(), "application/json");
    }
  });
}

/// Sends one packet; the receipt's arrival time is half the request round trip.
inline ChannelReceipt post_annotation(const std::string& base_url, const uplink::AnnotationPacket& packet,
                                      const Clock& clock,
                                      std::chrono::milliseconds timeout = std::chrono::milliseconds(2000)) {
  const std::string body = uplink::encode_packet(packet);
  const Micros t_send = clock.now();
  http::post_json(base_url + std::string(kAnnotationsPath), body, timeout, Errc::BrokerUnavailable);
  const Millis rtt = std::chrono::duration_cast<Millis>(clock.now() - t_send);
  return {std::string(kAnnotationsPath), body.size(), t_send,
          t_send + std::chrono::duration_cast<Micros>(one_way_latency(rtt)), Direction::Uplink};
}

}  // namespace semcast::transport
