#pragma once

#include "semcast/agents/pipeline.hpp"
#include "semcast/baseline/traditional.hpp"
#include "semcast/bench/metrics.hpp"
#include "semcast/bench/similarity.hpp"
#include "semcast/dataset.hpp"
#include "semcast/json_writer.hpp"
#include "semcast/mulse/estimator.hpp"
#include "semcast/transport/broker.hpp"
#include "semcast/transport/topics.hpp"
#include "semcast/uplink/adapters.hpp"
#include "semcast/uplink/sampler.hpp"

#include <functional>
#include <numeric>
#include <sstream>

namespace semcast::bench {

// ---- evaluation pairs ----------------------------------------------------------------

struct CaptionPair {
  int video = 0;
  std::string generated;
  std::string reference;
};

struct FramePair {
  int video = 0;
  std::string generated_frame;  // description of the rendered 3D frame
  std::string real_frame;       // description of the camera frame
};

inline std::vector<CaptionPair> load_caption_pairs(const std::filesystem::path& path) {
  std::vector<CaptionPair> out;
  try {
    for (const auto& j : read_json_file(path))
      out.push_back({j.at("video").get<int>(), j.at("generated").get<std::string>(), j.at("reference").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, path.string() + ": " + e.what());
  }
  return out;
}

inline std::vector<FramePair> load_frame_pairs(const std::filesystem::path& path) {
  std::vector<FramePair> out;
  try {
    for (const auto& j : read_json_file(path))
      out.push_back(
          {j.at("video").get<int>(), j.at("generated_frame").get<std::string>(), j.at("real_frame").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, path.string() + ": " + e.what());
  }
  return out;
}

// ---- configuration -----------------------------------------------------------------

struct ComparisonOptions {
  std::filesystem::path data_dir;
  std::vector<int> video_ids;  // empty: every benchmark video
  std::uint32_t sampling_period = uplink::kDefaultSamplingPeriod;
  LatencyProfile profile;
  int retries = agents::kDefaultRetryBudget;
  std::size_t memory_turns = agents::kDefaultMemoryTurns;
  scene::ConstraintProfile constraints = scene::ConstraintProfile::prompt_default();
  mulse::EnvironmentModel environment;
  mulse::ActuatorLayout actuators = mulse::four_zone_layout();
  std::string stream_id = "uav-0";
  std::optional<double> lambda_weight;
};

/// Emitted for every scene that reached the viewer.
struct PublishedScene {
  int video_id = 0;
  std::string stream;
  std::string code;
  uplink::TelemetryPacket telemetry;
  Micros timestamp{0};
  std::string description_hash;
};

struct ComparisonBackends {
  agents::CompletionBackend& describer;
  agents::CompletionBackend& coder;
  EmbeddingBackend& embedder;
  /// Clock the mock backends advance. Null means real backends: spans are
  /// measured on a steady clock and replayed onto the run's timeline.
  ManualClock* virtual_clock = nullptr;
  agents::ExchangeStore* store = nullptr;
  /// Optional second broker that receives a copy of every downlink message.
  transport::Broker* mirror = nullptr;
  std::function<void(const PublishedScene&)> on_scene;
};

// ---- report ----------------------------------------------------------------------------

struct VideoResult {
  int video_id = 0;
  std::string name;
  std::optional<std::string> error;  // Errc name when the video aborted
  std::size_t packets = 0;
  std::size_t scenes = 0;
  std::size_t failed_scenes = 0;
  transport::BitrateStats semantic_uplink, semantic_downlink, mulsemedia_downlink;
  transport::BitrateStats baseline_uplink, baseline_downlink;
  double uplink_reduction = 0.0;
  double downlink_reduction = 0.0;
  LatencyBreakdownSemantic semantic_latency;
  baseline::LatencyBreakdownTraditional traditional_latency;
  std::optional<SimilarityScore> caption_similarity;
  std::optional<SimilarityScore> frame_fidelity;
  std::optional<RDPoint> rd;
  std::string receipts_hash;
  std::string scenes_hash;

  bool ok() const { return !error.has_value(); }
};

struct Spread {
  double mean = 0.0;
  double stddev = 0.0;
};

inline Spread spread(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

struct Aggregate {
  std::size_t videos = 0;
  Spread semantic_uplink_bps, semantic_downlink_bps, baseline_uplink_bps, baseline_downlink_bps;
  double semantic_uplink_max_bps = 0.0;
  double semantic_downlink_max_bps = 0.0;
  double uplink_reduction = 0.0;
  double downlink_reduction = 0.0;
  LatencyBreakdownSemantic semantic_latency;
  baseline::LatencyBreakdownTraditional traditional_latency;
  std::optional<Spread> caption_similarity, frame_fidelity;
};

struct ExperimentReport {
  std::string config_hash;
  std::string describer_id, coder_id, embedder_id;
  std::vector<VideoResult> videos;
  Aggregate aggregate;
  bool partial = false;
};

namespace detail {

inline std::int64_t mean_micros(std::int64_t sum, std::size_t n) {
  return n == 0 ? 0 : (sum + static_cast<std::int64_t>(n) / 2) / static_cast<std::int64_t>(n);
}

inline void hash_receipts(Sha256& h, const std::vector<transport::ChannelReceipt>& receipts) {
  for (const auto& r : receipts) {
    h.update(r.route).update("|").update(std::to_string(r.payload_bytes)).update("|");
    h.update(std::to_string(r.t_send.count())).update("|").update(std::to_string(r.t_recv.count())).update("|");
    h.update(transport::to_string(r.direction)).update("\n");
  }
}

}  // namespace detail

inline std::string config_json(const ComparisonOptions& o) {
  CanonicalJsonWriter w;
  w.begin_object();
  w.key("actuators").begin_array();
  for (const auto& z : o.actuators) {
    w.begin_object();
    w.key("bearing").fixed(z.bearing, 3);
    w.key("id").string(z.id);
    w.end_object();
  }
  w.end_array();
  w.key("constraints").raw(nlohmann::json(o.constraints).dump());
  w.key("lambda_weight");
  if (o.lambda_weight) w.fixed(*o.lambda_weight, 6);
  else w.null();
  w.key("memory_turns").integer(static_cast<std::int64_t>(o.memory_turns));
  const auto& p = o.profile;
  w.key("profile").begin_object();
  w.key("code_render_us").integer(p.code_render.count());
  w.key("coder_us").integer(p.coder.count());
  w.key("describer_us").integer(p.describer.count());
  w.key("edge_to_cloud_us").integer(p.edge_to_cloud.count());
  w.key("traditional_egress_us").integer(p.traditional.egress.count());
  w.key("traditional_ingest_us").integer(p.traditional.ingest.count());
  w.key("traditional_rendering_us").integer(p.traditional.rendering.count());
  w.key("uav_to_cloud_us").integer(p.uav_to_cloud.count());
  w.end_object();
  w.key("retries").integer(o.retries);
  w.key("sampling_period").integer(o.sampling_period);
  w.key("stream_id").string(o.stream_id);
  w.key("video_ids").begin_array();
  for (int id : o.video_ids) w.integer(id);
  w.end_array();
  w.end_object();
  return w.str();
}

/// One benchmark video through both pipelines.
inline VideoResult run_video(const VideoEntry& video, const ComparisonOptions& options, ComparisonBackends& backends,
                             const std::map<int, std::string>& references) {
  VideoResult out;
  out.video_id = video.id;
  out.name = video.name;

  // Conventional stream: replay the recorded bitrates.
  const auto trace = baseline::load_trace(video.baseline_trace);
  const auto baseline_receipts = baseline::replay_receipts(trace);
  out.baseline_uplink = transport::meter_bandwidth(baseline_receipts, transport::Direction::Uplink);
  out.baseline_downlink = transport::meter_bandwidth(baseline_receipts, transport::Direction::Downlink);
  out.traditional_latency = options.profile.traditional;
  e2e_latency_traditional(out.traditional_latency);

  // Semantic stream.
  auto annotations = std::make_shared<const uplink::AnnotationTrace>(uplink::AnnotationTrace::load(video.annotation_trace));
  uplink::ReplayAdapter adapter(annotations);
  const auto tickets = uplink::sample_frames(video.fps, options.sampling_period, video.duration_s, options.stream_id);

  ManualClock own_timeline;
  ManualClock& timeline = backends.virtual_clock ? *backends.virtual_clock : own_timeline;
  SteadyClock steady;
  const Clock& span_clock = backends.virtual_clock ? static_cast<const Clock&>(*backends.virtual_clock) : steady;

  transport::LoopbackBroker broker(timeline);
  const std::string code_topic = transport::topic(options.stream_id, transport::Stream::Code);
  const std::string mulse_topic = transport::topic(options.stream_id, transport::Stream::Mulse);
  broker.set_link_delay(code_topic, options.profile.code_delivery());
  broker.set_link_delay(mulse_topic, options.profile.code_delivery());
  auto viewer = broker.subscribe(code_topic);

  agents::AgentMemory memory(options.memory_turns);
  std::vector<transport::ChannelReceipt> uplink_receipts, code_receipts, mulse_receipts;
  std::int64_t t2c_sum = 0, delivery_sum = 0, render_sum = 0;
  std::optional<agents::SceneDescription> first_description;
  std::optional<scene::SceneGraph> first_scene;
  Sha256 scenes_hash;

  for (const auto& ticket : tickets) {
    const auto detections = uplink::detect_objects(ticket, adapter);
    const auto caption = uplink::caption_frame(ticket, adapter);
    auto telemetry = annotations->at(ticket.frame_index).telemetry;
    const auto packet = uplink::build_annotation_packet(detections, caption, telemetry, ticket);
    ++out.packets;

    const Micros arrival = ticket.capture_timestamp + options.profile.uav_to_cloud;
    uplink_receipts.push_back({std::string(transport::kAnnotationsPath), packet.encoded_bytes, ticket.capture_timestamp,
                               arrival, transport::Direction::Uplink});

    timeline.set(arrival);
    const Micros span_start = span_clock.now();
    const auto description = agents::fuse_description(packet, backends.describer, memory, backends.store, span_clock);
    std::optional<agents::CodegenResult> generated;
    try {
      generated = agents::generate_scene_code(description, backends.coder, options.constraints, backends.store,
                                              span_clock, options.retries);
    } catch (const agents::CodegenError&) {
      ++out.failed_scenes;
      continue;
    }
    const Micros text_to_code = span_clock.now() - span_start;
    if (!backends.virtual_clock) timeline.set(arrival + text_to_code);

    const auto code_receipt = broker.publish(code_topic, generated->code, transport::default_qos(transport::Stream::Code));
    const auto delivered = viewer->try_pop();
    if (!delivered) throw Error(Errc::BrokerUnavailable, "scene code was not delivered");
    code_receipts.push_back(code_receipt);

    const auto env = mulse::estimate_environment(packet.telemetry, description.text, options.environment);
    const auto frame = mulse::build_mulsemedia_map(env, packet.telemetry, options.actuators, code_receipt.t_send,
                                                   options.environment.max_speed);
    const std::string mulse_payload = mulse::encode_frame(frame);
    mulse_receipts.push_back(broker.publish(mulse_topic, mulse_payload, transport::default_qos(transport::Stream::Mulse)));

    if (backends.mirror) {
      backends.mirror->publish(transport::topic(options.stream_id, transport::Stream::Telemetry),
                               uplink::encode_telemetry_json(packet.telemetry),
                               transport::default_qos(transport::Stream::Telemetry));
      backends.mirror->publish(code_topic, generated->code, transport::default_qos(transport::Stream::Code));
      backends.mirror->publish(mulse_topic, mulse_payload, transport::default_qos(transport::Stream::Mulse));
    }

    const LatencyBreakdownSemantic spans{text_to_code, delivered->t_recv - code_receipt.t_send,
                                         options.profile.code_render};
    t2c_sum += spans.text_to_code.count();
    delivery_sum += spans.delivery.count();
    render_sum += spans.rendering.count();
    ++out.scenes;
    scenes_hash.update(sha256_hex(generated->code)).update("\n");

    if (backends.on_scene) {
      backends.on_scene({video.id, options.stream_id, generated->code, packet.telemetry, code_receipt.t_send,
                         sha256_hex(description.text)});
    }
    if (!first_description) {
      first_description = description;
      first_scene = generated->graph;
    }
  }

  out.semantic_uplink = transport::meter_bandwidth(uplink_receipts, transport::Direction::Uplink);
  if (out.scenes == 0) throw Error(Errc::ValidationExhausted, "no scene passed validation");
  out.semantic_downlink = transport::meter_bandwidth(code_receipts, transport::Direction::Downlink);
  out.mulsemedia_downlink = transport::meter_bandwidth(mulse_receipts, transport::Direction::Downlink);
  out.semantic_latency = {Micros{detail::mean_micros(t2c_sum, out.scenes)},
                          Micros{detail::mean_micros(delivery_sum, out.scenes)},
                          Micros{detail::mean_micros(render_sum, out.scenes)}};
  out.uplink_reduction = bandwidth_reduction(out.baseline_uplink.mean_bps, out.semantic_uplink.mean_bps);
  out.downlink_reduction = bandwidth_reduction(out.baseline_downlink.mean_bps, out.semantic_downlink.mean_bps);

  if (auto ref = references.find(video.id); ref != references.end()) {
    out.caption_similarity = semantic_similarity(first_description->text, ref->second, backends.embedder);
    out.frame_fidelity = frame_fidelity_eval(*first_scene, ref->second, backends.describer, backends.embedder);
    out.rd = rd_point(out.semantic_downlink, *out.frame_fidelity, options.lambda_weight);
  }

  Sha256 receipts_hash;
  detail::hash_receipts(receipts_hash, uplink_receipts);
  detail::hash_receipts(receipts_hash, code_receipts);
  detail::hash_receipts(receipts_hash, mulse_receipts);
  detail::hash_receipts(receipts_hash, baseline_receipts);
  out.receipts_hash = receipts_hash.hex();
  out.scenes_hash = scenes_hash.hex();
  return out;
}

inline Aggregate aggregate(const std::vector<VideoResult>& videos) {
  Aggregate a;
  std::vector<double> su, sd, bu, bd, cap, fid;
  std::int64_t t2c = 0, delivery = 0, render = 0, ingest = 0, egress = 0, trad_render = 0;
  for (const auto& v : videos) {
    if (!v.ok()) continue;
    ++a.videos;
    su.push_back(v.semantic_uplink.mean_bps);
    sd.push_back(v.semantic_downlink.mean_bps);
    bu.push_back(v.baseline_uplink.mean_bps);
    bd.push_back(v.baseline_downlink.mean_bps);
    a.semantic_uplink_max_bps = std::max(a.semantic_uplink_max_bps, v.semantic_uplink.max_bps);
    a.semantic_downlink_max_bps = std::max(a.semantic_downlink_max_bps, v.semantic_downlink.max_bps);
    t2c += v.semantic_latency.text_to_code.count();
    delivery += v.semantic_latency.delivery.count();
    render += v.semantic_latency.rendering.count();
    ingest += v.traditional_latency.ingest.count();
    egress += v.traditional_latency.egress.count();
    trad_render += v.traditional_latency.rendering.count();
    if (v.caption_similarity) cap.push_back(v.caption_similarity->value);
    if (v.frame_fidelity) fid.push_back(v.frame_fidelity->value);
  }
  if (a.videos == 0) return a;
  a.semantic_uplink_bps = spread(su);
  a.semantic_downlink_bps = spread(sd);
  a.baseline_uplink_bps = spread(bu);
  a.baseline_downlink_bps = spread(bd);
  a.uplink_reduction = bandwidth_reduction(a.baseline_uplink_bps.mean, a.semantic_uplink_bps.mean);
  a.downlink_reduction = bandwidth_reduction(a.baseline_downlink_bps.mean, a.semantic_downlink_bps.mean);
  a.semantic_latency = {Micros{detail::mean_micros(t2c, a.videos)}, Micros{detail::mean_micros(delivery, a.videos)},
                        Micros{detail::mean_micros(render, a.videos)}};
  a.traditional_latency = {Micros{detail::mean_micros(ingest, a.videos)}, Micros{detail::mean_micros(egress, a.videos)},
                           Micros{detail::mean_micros(trad_render, a.videos)}};
  if (!cap.empty()) a.caption_similarity = spread(cap);
  if (!fid.empty()) a.frame_fidelity = spread(fid);
  return a;
}

/// Runs every selected video sequentially (the mock timeline is shared) and
/// aggregates. A failing video is flagged in the report; if none succeeds
/// because a backend is down the run raises BackendUnavailable.
inline ExperimentReport run_comparison(const ComparisonOptions& options, ComparisonBackends backends) {
  auto videos = benchmark_videos(load_catalog(options.data_dir));
  if (!options.video_ids.empty()) {
    std::vector<VideoEntry> chosen;
    for (int id : options.video_ids) {
      auto it = std::find_if(videos.begin(), videos.end(), [&](const VideoEntry& v) { return v.id == id; });
      if (it == videos.end()) throw Error(Errc::DatasetMissing, "no benchmark video " + std::to_string(id));
      chosen.push_back(*it);
    }
    videos = std::move(chosen);
  }

  std::map<int, std::string> references;
  const auto captions_path = options.data_dir / "eval" / "captions.json";
  if (std::filesystem::exists(captions_path))
    for (const auto& c : load_caption_pairs(captions_path)) references[c.video] = c.reference;

  ExperimentReport report;
  report.config_hash = sha256_hex(config_json(options));
  report.describer_id = backends.describer.model_id();
  report.coder_id = backends.coder.model_id();
  report.embedder_id = backends.embedder.backend_id();

  std::size_t backend_failures = 0;
  for (const auto& v : videos) {
    try {
      report.videos.push_back(run_video(v, options, backends, references));
    } catch (const Error& e) {
      VideoResult failed;
      failed.video_id = v.id;
      failed.name = v.name;
      failed.error = std::string(to_string(e.code()));
      if (e.code() == Errc::BackendUnavailable) ++backend_failures;
      report.videos.push_back(std::move(failed));
      report.partial = true;
    }
  }
  report.aggregate = aggregate(report.videos);
  if (report.aggregate.videos == 0 && backend_failures > 0) {
    throw Error(Errc::BackendUnavailable, "every video failed on an unreachable backend");
  }
  return report;
}

// ---- serialization -------------------------------------------------------------------

namespace detail {

inline void write_stats(CanonicalJsonWriter& w, std::string_view name, const transport::BitrateStats& s) {
  w.key(name).begin_object();
  w.key("byte_total").integer(static_cast<std::int64_t>(s.byte_total));
  w.key("max_bps").fixed(s.max_bps, 3);
  w.key("mean_bps").fixed(s.mean_bps, 3);
  w.key("receipt_count").integer(static_cast<std::int64_t>(s.receipt_count));
  w.key("stddev_bps").fixed(s.stddev_bps, 3);
  w.key("window_s").fixed(s.window_s, 3);
  w.end_object();
}

inline void write_semantic_latency(CanonicalJsonWriter& w, const LatencyBreakdownSemantic& b) {
  w.begin_object();
  w.key("delivery_us").integer(b.delivery.count());
  w.key("rendering_us").integer(b.rendering.count());
  w.key("text_to_code_us").integer(b.text_to_code.count());
  w.key("total_us").integer(e2e_latency_semantic(b).count());
  w.end_object();
}

inline void write_traditional_latency(CanonicalJsonWriter& w, const baseline::LatencyBreakdownTraditional& b) {
  w.begin_object();
  w.key("egress_us").integer(b.egress.count());
  w.key("ingest_us").integer(b.ingest.count());
  w.key("rendering_us").integer(b.rendering.count());
  w.key("total_us").integer(baseline::e2e_latency_traditional(b).count());
  w.end_object();
}

inline void write_score(CanonicalJsonWriter& w, std::string_view name, const std::optional<SimilarityScore>& s) {
  w.key(name);
  if (!s) {
    w.null();
    return;
  }
  w.begin_object();
  w.key("backend_id").string(s->backend_id);
  w.key("text_a_hash").string(s->text_a_hash);
  w.key("text_b_hash").string(s->text_b_hash);
  w.key("value").fixed(s->value, 6);
  w.end_object();
}

inline void write_spread(CanonicalJsonWriter& w, std::string_view name, const Spread& s, int decimals) {
  w.key(name).begin_object();
  w.key("mean").fixed(s.mean, decimals);
  w.key("stddev").fixed(s.stddev, decimals);
  w.end_object();
}

}  // namespace detail

inline std::string report_json(const ExperimentReport& r) {
  CanonicalJsonWriter w;
  w.begin_object();
  const auto& a = r.aggregate;
  w.key("aggregate").begin_object();
  w.key("baseline");
  w.begin_object();
  detail::write_spread(w, "downlink_bps", a.baseline_downlink_bps, 3);
  detail::write_spread(w, "uplink_bps", a.baseline_uplink_bps, 3);
  w.end_object();
  w.key("caption_similarity");
  if (a.caption_similarity) {
    w.begin_object();
    w.key("mean").fixed(a.caption_similarity->mean, 6);
    w.key("stddev").fixed(a.caption_similarity->stddev, 6);
    w.end_object();
  } else {
    w.null();
  }
  w.key("downlink_reduction_pct").fixed(a.downlink_reduction, 4);
  w.key("frame_fidelity");
  if (a.frame_fidelity) {
    w.begin_object();
    w.key("mean").fixed(a.frame_fidelity->mean, 6);
    w.key("stddev").fixed(a.frame_fidelity->stddev, 6);
    w.end_object();
  } else {
    w.null();
  }
  w.key("latency").begin_object();
  w.key("semantic");
  detail::write_semantic_latency(w, a.semantic_latency);
  w.key("traditional");
  detail::write_traditional_latency(w, a.traditional_latency);
  w.end_object();
  w.key("semantic").begin_object();
  detail::write_spread(w, "downlink_bps", a.semantic_downlink_bps, 3);
  w.key("downlink_max_bps").fixed(a.semantic_downlink_max_bps, 3);
  detail::write_spread(w, "uplink_bps", a.semantic_uplink_bps, 3);
  w.key("uplink_max_bps").fixed(a.semantic_uplink_max_bps, 3);
  w.end_object();
  w.key("uplink_reduction_pct").fixed(a.uplink_reduction, 4);
  w.key("videos").integer(static_cast<std::int64_t>(a.videos));
  w.end_object();

  w.key("backends").begin_object();
  w.key("coder").string(r.coder_id);
  w.key("describer").string(r.describer_id);
  w.key("embedder").string(r.embedder_id);
  w.end_object();
  w.key("config_hash").string(r.config_hash);
  w.key("partial").boolean(r.partial);

  w.key("videos").begin_array();
  for (const auto& v : r.videos) {
    w.begin_object();
    if (!v.ok()) {
      w.key("error").string(*v.error);
      w.key("name").string(v.name);
      w.key("video_id").integer(v.video_id);
      w.end_object();
      continue;
    }
    w.key("baseline").begin_object();
    detail::write_stats(w, "downlink", v.baseline_downlink);
    detail::write_stats(w, "uplink", v.baseline_uplink);
    w.end_object();
    detail::write_score(w, "caption_similarity", v.caption_similarity);
    w.key("downlink_reduction_pct").fixed(v.downlink_reduction, 4);
    w.key("failed_scenes").integer(static_cast<std::int64_t>(v.failed_scenes));
    detail::write_score(w, "frame_fidelity", v.frame_fidelity);
    w.key("latency").begin_object();
    w.key("semantic");
    detail::write_semantic_latency(w, v.semantic_latency);
    w.key("traditional");
    detail::write_traditional_latency(w, v.traditional_latency);
    w.end_object();
    w.key("name").string(v.name);
    w.key("packets").integer(static_cast<std::int64_t>(v.packets));
    w.key("rd");
    if (v.rd) {
      w.begin_object();
      w.key("distortion").fixed(v.rd->distortion, 6);
      w.key("lambda_weight");
      if (v.rd->lambda_weight) w.fixed(*v.rd->lambda_weight, 6);
      else w.null();
      w.key("rate_bps").fixed(v.rd->rate_bps, 3);
      w.end_object();
    } else {
      w.null();
    }
    w.key("receipts_hash").string(v.receipts_hash);
    w.key("scenes").integer(static_cast<std::int64_t>(v.scenes));
    w.key("scenes_hash").string(v.scenes_hash);
    w.key("semantic").begin_object();
    detail::write_stats(w, "downlink", v.semantic_downlink);
    detail::write_stats(w, "mulsemedia", v.mulsemedia_downlink);
    detail::write_stats(w, "uplink", v.semantic_uplink);
    w.end_object();
    w.key("uplink_reduction_pct").fixed(v.uplink_reduction, 4);
    w.key("video_id").integer(v.video_id);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

inline std::string report_hash(const ExperimentReport& r) { return sha256_hex(report_json(r)); }

inline std::string report_markdown(const ExperimentReport& r) {
  auto f = [](double v, int d) { return format_fixed(v, d); };
  std::ostringstream md;
  md << "# Semantic vs conventional streaming\n\n";
  md << "Backends: describer `" << r.describer_id << "`, coder `" << r.coder_id << "`, embeddings `" << r.embedder_id
     << "`.\n\n";
  md << "## Bandwidth\n\n";
  md << "| Video | Uplink semantic (kbps) | Uplink conventional (Mbps) | Downlink semantic (kbps) | Downlink conventional "
        "(Mbps) | Downlink saving (%) |\n";
  md << "|---|---:|---:|---:|---:|---:|\n";
  for (const auto& v : r.videos) {
    if (!v.ok()) {
      md << "| " << v.video_id << " " << v.name << " | failed: " << *v.error << " | | | | |\n";
      continue;
    }
    md << "| " << v.video_id << " " << v.name << " | " << f(v.semantic_uplink.mean_bps / 1e3, 2) << " (max "
       << f(v.semantic_uplink.max_bps / 1e3, 2) << ") | " << f(v.baseline_uplink.mean_bps / 1e6, 2) << " | "
       << f(v.semantic_downlink.mean_bps / 1e3, 2) << " | " << f(v.baseline_downlink.mean_bps / 1e6, 2) << " | "
       << f(v.downlink_reduction, 3) << " |\n";
  }
  const auto& a = r.aggregate;
  md << "| **Mean** | " << f(a.semantic_uplink_bps.mean / 1e3, 2) << " (max " << f(a.semantic_uplink_max_bps / 1e3, 2)
     << ") | " << f(a.baseline_uplink_bps.mean / 1e6, 2) << " | " << f(a.semantic_downlink_bps.mean / 1e3, 2) << " | "
     << f(a.baseline_downlink_bps.mean / 1e6, 2) << " | " << f(a.downlink_reduction, 3) << " |\n\n";
  md << "## Latency\n\n";
  md << "| Pipeline | Components (ms) | Total (ms) |\n|---|---|---:|\n";
  const auto& s = a.semantic_latency;
  md << "| Semantic | text-to-code " << f(to_ms(s.text_to_code), 3) << " + delivery " << f(to_ms(s.delivery), 3)
     << " + rendering " << f(to_ms(s.rendering), 3) << " | " << f(to_ms(e2e_latency_semantic(s)), 3) << " |\n";
  const auto& t = a.traditional_latency;
  md << "| Conventional | ingest " << f(to_ms(t.ingest), 3) << " + egress " << f(to_ms(t.egress), 3) << " + rendering "
     << f(to_ms(t.rendering), 3) << " | " << f(to_ms(baseline::e2e_latency_traditional(t)), 3) << " |\n\n";
  md << "## Fidelity\n\n| Video | Caption similarity | Frame fidelity | Distortion |\n|---|---:|---:|---:|\n";
  for (const auto& v : r.videos) {
    if (!v.ok() || !v.caption_similarity) continue;
    md << "| " << v.video_id << " | " << f(v.caption_similarity->value, 4) << " | " << f(v.frame_fidelity->value, 4)
       << " | " << f(v.rd->distortion, 4) << " |\n";
  }
  md << "\nReport hash: `" << report_hash(r) << "`\n";
  return md.str();
}

/// Deterministic backends on a shared virtual clock, with the profile's
/// backend latencies injected. Fixture files are used when present.
struct MockRig {
  ManualClock clock;
  agents::MockBackend describer;
  agents::MockBackend coder;
  HashedEmbedding embedder;

  MockRig(const LatencyProfile& profile, const std::filesystem::path& fixtures_dir)
      : describer(options_for(agents::AgentId::Describer, profile.describer, fixtures_dir / "describer.json"), &clock),
        coder(options_for(agents::AgentId::Coder, profile.coder, fixtures_dir / "coder.json"), &clock) {}

  ComparisonBackends backends(agents::ExchangeStore* store = nullptr) {
    return {describer, coder, embedder, &clock, store, nullptr, {}};
  }

 private:
  static agents::MockOptions options_for(agents::AgentId role, Micros latency, const std::filesystem::path& fixtures) {
    agents::MockOptions o;
    o.role = role;
    o.model_id = role == agents::AgentId::Describer ? "mock-describer" : "mock-coder";
    o.token_cap = role == agents::AgentId::Describer ? agents::kDefaultDescriberTokenCap : agents::kDefaultCoderTokenCap;
    o.injected_latency = latency;
    if (std::filesystem::exists(fixtures)) o.fixtures = agents::load_fixtures(fixtures);
    return o;
  }
};

}  // namespace semcast::bench
