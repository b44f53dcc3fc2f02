#pragma once

#include "semcast/http.hpp"
#include "semcast/uplink/adapters.hpp"

#include <json.hpp>

#include <chrono>
#include <string>

namespace semcast::uplink {

inline constexpr std::chrono::milliseconds kDefaultAdapterTimeout{2000};

inline nlohmann::json frame_request(const FrameTicket& frame) {
  return {{"frame_index", frame.frame_index}, {"source", frame.source_id}, {"ts", frame.capture_timestamp.count()}};
}

/// Detector running as a service: POST {frame_index, source, ts} ->
/// {"detections": [{label, conf, box}]}.
class RemoteDetectionAdapter final : public DetectionAdapter {
 public:
  explicit RemoteDetectionAdapter(std::string url, std::chrono::milliseconds timeout = kDefaultAdapterTimeout)
      : url_(std::move(url)), timeout_(timeout) {}

  DetectionSet detect(const FrameTicket& frame) override {
    const std::string body = http::post_json(url_, frame_request(frame).dump(), timeout_, Errc::AdapterUnavailable);
    try {
      const auto doc = nlohmann::json::parse(body);
      DetectionSet out;
      for (const auto& d : doc.at("detections")) out.push_back(detection_from_json(d));
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::AdapterUnavailable, std::string("bad detector response: ") + e.what());
    }
  }

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

/// Captioner service: same request, response {"caption": str, "model": str}.
class RemoteCaptionAdapter final : public CaptionAdapter {
 public:
  explicit RemoteCaptionAdapter(std::string url, std::chrono::milliseconds timeout = kDefaultAdapterTimeout)
      : url_(std::move(url)), timeout_(timeout) {}

  Caption caption(const FrameTicket& frame) override {
    const std::string body = http::post_json(url_, frame_request(frame).dump(), timeout_, Errc::AdapterUnavailable);
    try {
      const auto j = nlohmann::json::parse(body);
      return {j.at("caption").get<std::string>(), j.value("model", std::string("remote"))};
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::AdapterUnavailable, std::string("bad captioner response: ") + e.what());
    }
  }

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

}  // namespace semcast::uplink
