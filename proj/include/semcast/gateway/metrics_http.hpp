#pragma once

#include "semcast/bench/metrics.hpp"
#include "semcast/json_writer.hpp"
#include "semcast/mulse/estimator.hpp"
#include "semcast/transport/broker.hpp"
#include "semcast/transport/metering.hpp"
#include "semcast/transport/topics.hpp"

#include <httplib.h>
#include <json.hpp>

#include <mutex>
#include <optional>

namespace semcast::gateway {

inline constexpr int kMetricDecimals = 3;

/// Live figures for the operator HUD. Snapshots are canonical JSON tagged
/// "kind":"snapshot"; the viewer reports its render preparation time on the
/// same topic tagged "kind":"render".
class MetricsBoard {
 public:
  explicit MetricsBoard(std::string stream_id) : stream_(std::move(stream_id)) {}

  void set_bitrates(const transport::BitrateStats& up, const transport::BitrateStats& down) {
    std::lock_guard lock(mu_);
    uplink_bps_ = up.mean_bps;
    downlink_bps_ = down.mean_bps;
  }

  void set_latency(const bench::LatencyBreakdownSemantic& semantic, const baseline::LatencyBreakdownTraditional& trad) {
    std::lock_guard lock(mu_);
    latency_ = semantic;
    traditional_ = trad;
  }

  void record_scene(Micros at) {
    std::lock_guard lock(mu_);
    ++scenes_;
    last_scene_ = at;
  }

  void set_mulsemedia(const mulse::MulsemediaFrame& f) {
    std::lock_guard lock(mu_);
    mulse_ = f;
  }

  /// Accepts a viewer render report; anything else on the topic is ignored.
  /// Returns true when the report was applied.
  bool ingest_report(std::string_view payload) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(payload);
    } catch (const nlohmann::json::exception&) {
      return false;
    }
    if (!j.is_object() || j.value("kind", "") != "render") return false;
    const auto it = j.find("render_prep_ms");
    if (it == j.end() || !it->is_number() || it->get<double>() < 0.0) return false;
    std::lock_guard lock(mu_);
    latency_.rendering = std::chrono::duration_cast<Micros>(Millis(it->get<double>()));
    ++render_reports_;
    return true;
  }

  std::string snapshot_json() const {
    std::lock_guard lock(mu_);
    CanonicalJsonWriter w;
    w.begin_object();
    w.key("downlink_bps").fixed(downlink_bps_, kMetricDecimals);
    w.key("e2e_ms").fixed(to_ms(bench::e2e_latency_semantic(latency_)), kMetricDecimals);
    w.key("kind").string("snapshot");
    w.key("last_scene_us").integer(last_scene_.count());
    w.key("latency").begin_object();
    w.key("delivery_ms").fixed(to_ms(latency_.delivery), kMetricDecimals);
    w.key("rendering_ms").fixed(to_ms(latency_.rendering), kMetricDecimals);
    w.key("text_to_code_ms").fixed(to_ms(latency_.text_to_code), kMetricDecimals);
    w.end_object();
    w.key("mulse");
    if (mulse_) w.raw(mulse::encode_frame(*mulse_));
    else w.null();
    w.key("render_reports").integer(static_cast<std::int64_t>(render_reports_));
    w.key("scenes").integer(static_cast<std::int64_t>(scenes_));
    w.key("stream").string(stream_);
    w.key("traditional_e2e_ms").fixed(to_ms(baseline::e2e_latency_traditional(traditional_)), kMetricDecimals);
    w.key("uplink_bps").fixed(uplink_bps_, kMetricDecimals);
    w.end_object();
    return w.take();
  }

  transport::ChannelReceipt publish(transport::Broker& broker) const {
    return broker.publish(transport::topic(stream_, transport::Stream::Metrics), snapshot_json(),
                          transport::default_qos(transport::Stream::Metrics));
  }

 private:
  mutable std::mutex mu_;
  std::string stream_;
  double uplink_bps_ = 0.0;
  double downlink_bps_ = 0.0;
  bench::LatencyBreakdownSemantic latency_;
  baseline::LatencyBreakdownTraditional traditional_ = baseline::default_traditional_profile();
  std::size_t scenes_ = 0;
  std::size_t render_reports_ = 0;
  Micros last_scene_{0};
  std::optional<mulse::MulsemediaFrame> mulse_;
};

/// GET /v1/metrics returns the current snapshot.
inline void mount_metrics_route(httplib::Server& server, const MetricsBoard& board) {
  server.Get(std::string(transport::kMetricsPath), [&board](const httplib::Request&, httplib::Response& res) {
    res.set_content(board.snapshot_json(), "application/json");
  });
}

}  // namespace semcast::gateway
