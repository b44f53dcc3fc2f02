#pragma once

#include "semcast/bench/comparison.hpp"
#include "semcast/gateway/config.hpp"
#include "semcast/gateway/dt_store.hpp"

#include <memory>

namespace semcast::gateway {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitValidation = 2, kExitBackend = 3, kExitPartial = 4 };

inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::BackendUnavailable:
    case Errc::BrokerUnavailable:
    case Errc::AdapterUnavailable: return kExitBackend;
    case Errc::PartialRun: return kExitPartial;
    case Errc::StorageFailure: return kExitFailure;
    default: return kExitValidation;
  }
}

/// Owns the describer, coder and embedder a config asks for. Mock mode runs
/// on a virtual timeline; remote mode measures wall time.
class BackendSet {
 public:
  BackendSet(const RunConfig& config, const std::filesystem::path& base) {
    if (config.mode == BackendMode::Mock) {
      rig_ = std::make_unique<bench::MockRig>(config.latency, fixtures_dir(config, base));
      return;
    }
    auto remote = [](const EndpointConfig& e, std::string_view what) {
      if (e.url.empty()) throw Error(Errc::ConfigError, std::string(what) + ".url is required in remote mode");
      agents::RemoteOptions o;
      o.url = e.url;
      o.model_id = e.model;
      o.token_cap = e.token_cap;
      return std::make_unique<agents::RemoteBackend>(std::move(o));
    };
    describer_ = remote(config.describer, "backends.describer");
    coder_ = remote(config.coder, "backends.coder");
    if (config.embedding.url.empty()) {
      embedder_ = std::make_unique<bench::HashedEmbedding>();
    } else {
      bench::RemoteEmbeddingOptions o;
      o.url = config.embedding.url;
      o.model = config.embedding.model;
      embedder_ = std::make_unique<bench::RemoteEmbedding>(std::move(o));
    }
  }

  bench::ComparisonBackends backends(agents::ExchangeStore* store = nullptr) {
    if (rig_) return rig_->backends(store);
    return {*describer_, *coder_, *embedder_, nullptr, store, nullptr, {}};
  }

 private:
  std::unique_ptr<bench::MockRig> rig_;
  std::unique_ptr<agents::CompletionBackend> describer_, coder_;
  std::unique_ptr<bench::EmbeddingBackend> embedder_;
};

/// Scenes from different videos share a stream id and restart their
/// timelines, so the stored stream key carries the video id.
inline DTEntry dt_entry_from(const bench::PublishedScene& s) {
  return {s.code,
          {s.telemetry.latitude, s.telemetry.longitude, s.telemetry.altitude},
          s.timestamp,
          s.stream + ":" + std::to_string(s.video_id),
          s.description_hash};
}

inline std::string dt_entry_json(const StoredEntry& s) {
  const auto& e = s.entry;
  CanonicalJsonWriter w;
  w.begin_object();
  w.key("alt").fixed(e.pose.alt, uplink::kMeterDecimals);
  w.key("description_hash").string(e.description_hash);
  w.key("key").integer(static_cast<std::int64_t>(s.key));
  w.key("lat").fixed(e.pose.lat, uplink::kDegreeDecimals);
  w.key("lon").fixed(e.pose.lon, uplink::kDegreeDecimals);
  w.key("scene").string(e.scene);
  w.key("stream").string(e.stream);
  w.key("timestamp_us").integer(e.timestamp.count());
  w.end_object();
  return w.take();
}

}  // namespace semcast::gateway
