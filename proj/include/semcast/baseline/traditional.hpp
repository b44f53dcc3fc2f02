#pragma once

#include "semcast/clock.hpp"
#include "semcast/dataset.hpp"
#include "semcast/error.hpp"
#include "semcast/transport/metering.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <thread>

namespace semcast::baseline {

using transport::ChannelReceipt;
using transport::Direction;
using transport::kMeterBin;

inline constexpr std::string_view kIngestRoute = "rtsp";
inline constexpr std::string_view kEgressRoute = "webrtc";
inline constexpr int kFramesPerSecond = 30;

/// Recorded per-second bitrates of the conventional stream for one video.
struct VideoTrace {
  int video_id = 0;
  int duration_s = 0;
  std::vector<std::uint64_t> uplink_bps;
  std::vector<std::uint64_t> downlink_bps;
  std::string resolution;
};

inline void validate(const VideoTrace& t) {
  if (t.duration_s <= 0) throw Error(Errc::EmptyTrace, "video " + std::to_string(t.video_id) + ": zero duration");
  const auto n = static_cast<std::size_t>(t.duration_s);
  if (t.uplink_bps.size() != n || t.downlink_bps.size() != n) {
    throw Error(Errc::ParseFailure, "video " + std::to_string(t.video_id) + ": series length differs from duration");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t.downlink_bps[i] > t.uplink_bps[i]) {
      throw Error(Errc::ParseFailure,
                  "video " + std::to_string(t.video_id) + ": downlink above uplink at second " + std::to_string(i));
    }
  }
}

inline VideoTrace parse_trace(const nlohmann::json& j) {
  VideoTrace t;
  try {
    t.video_id = j.at("video_id").get<int>();
    t.duration_s = j.at("duration_s").get<int>();
    t.uplink_bps = j.at("uplink_bps").get<std::vector<std::uint64_t>>();
    t.downlink_bps = j.at("downlink_bps").get<std::vector<std::uint64_t>>();
    t.resolution = j.value("resolution", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, std::string("baseline trace: ") + e.what());
  }
  validate(t);
  return t;
}

inline VideoTrace load_trace(const std::filesystem::path& path) { return parse_trace(read_json_file(path)); }

inline std::vector<VideoTrace> load_baseline_set(const std::vector<VideoEntry>& videos) {
  std::vector<VideoTrace> out;
  for (const auto& v : videos) {
    if (v.baseline_trace.empty()) continue;
    out.push_back(load_trace(v.baseline_trace));
  }
  if (out.empty()) throw Error(Errc::DatasetMissing, "no baseline traces");
  return out;
}

using ReceiptSink = std::function<void(const ChannelReceipt&)>;

struct ReplayOptions {
  /// Wall-clock pacing multiplier; infinity replays without sleeping.
  double speed = std::numeric_limits<double>::infinity();
  Micros start{0};
};

/// Emits one ingest and one egress receipt per frame. Bytes for a second are
/// spread over its frames so the one-second bins add back to the recorded
/// rate (to within a byte). Timestamps sit on the trace timeline regardless of
/// pacing. Zero-rate seconds emit nothing.
inline std::size_t replay_trace(const VideoTrace& trace, const ReceiptSink& sink, ReplayOptions options = {}) {
  if (trace.duration_s <= 0 || trace.uplink_bps.empty()) {
    throw Error(Errc::EmptyTrace, "video " + std::to_string(trace.video_id));
  }
  if (!(options.speed > 0.0)) throw Error(Errc::InvalidArgument, "replay speed must be positive");
  const bool paced = std::isfinite(options.speed);
  const auto wall_start = std::chrono::steady_clock::now();
  const Micros frame_gap{kMeterBin.count() / kFramesPerSecond};
  std::size_t emitted = 0;

  auto split = [](std::uint64_t bps, int frame) {
    const std::uint64_t bytes = (bps + 4) / 8;
    return bytes / kFramesPerSecond + (static_cast<std::uint64_t>(frame) < bytes % kFramesPerSecond ? 1 : 0);
  };

  for (std::size_t s = 0; s < trace.uplink_bps.size(); ++s) {
    for (int f = 0; f < kFramesPerSecond; ++f) {
      const Micros t = options.start + kMeterBin * static_cast<std::int64_t>(s) + frame_gap * f;
      if (paced) {
        const auto due = std::chrono::duration<double, std::micro>((t - options.start).count() / options.speed);
        std::this_thread::sleep_until(wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(due));
      }
      if (const auto up = split(trace.uplink_bps[s], f)) {
        sink({std::string(kIngestRoute), up, t, t, Direction::Uplink});
        ++emitted;
      }
      if (const auto down = split(trace.downlink_bps[s], f)) {
        sink({std::string(kEgressRoute), down, t, t, Direction::Downlink});
        ++emitted;
      }
    }
  }
  return emitted;
}

inline std::vector<ChannelReceipt> replay_receipts(const VideoTrace& trace, ReplayOptions options = {}) {
  std::vector<ChannelReceipt> out;
  out.reserve(trace.uplink_bps.size() * kFramesPerSecond * 2);
  replay_trace(trace, [&](const ChannelReceipt& r) { out.push_back(r); }, options);
  return out;
}

/// Ingest, transcode-and-egress, and rendering spans, held in whole
/// microseconds so totals are exact and order-independent.
struct LatencyBreakdownTraditional {
  Micros ingest{0};
  Micros egress{0};
  Micros rendering{0};
};

/// Default profile: 100 ms rendering per 30 frames; the ingest/egress split is
/// illustrative and sums with rendering to the measured 980 ms.
inline LatencyBreakdownTraditional default_traditional_profile() {
  return {Micros{300'000}, Micros{580'000}, Micros{100'000}};
}

inline Micros e2e_latency_traditional(const LatencyBreakdownTraditional& b) {
  if (b.ingest.count() < 0 || b.egress.count() < 0 || b.rendering.count() < 0) {
    throw Error(Errc::NegativeComponent, "traditional latency component below zero");
  }
  return b.ingest + b.egress + b.rendering;
}

}  // namespace semcast::baseline
