#pragma once

#include "semcast/bench/comparison.hpp"
#include "semcast/json_writer.hpp"
#include "semcast/mulse/estimator.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>

namespace semcast::gateway {

enum class BackendMode { Mock, Remote };

struct EndpointConfig {
  std::string url;
  std::string model;
  int token_cap = 0;
  bool operator==(const EndpointConfig&) const = default;
};

/// Distance scales for nearest-scene lookup: one unit of distance is one
/// metre horizontally, one metre vertically, or `ms_per_unit` of time.
struct DistanceWeights {
  double horizontal_m = 1.0;
  double vertical_m = 1.0;
  double ms_per_unit = 100.0;
  bool operator==(const DistanceWeights&) const = default;
};

struct RunConfig {
  BackendMode mode = BackendMode::Mock;
  EndpointConfig describer{"", "mock-describer", agents::kDefaultDescriberTokenCap};
  EndpointConfig coder{"", "mock-coder", agents::kDefaultCoderTokenCap};
  EndpointConfig embedding{"", "hashed-bow-256", 0};
  std::uint32_t sampling_period = uplink::kDefaultSamplingPeriod;
  int retries = agents::kDefaultRetryBudget;
  std::uint32_t memory_turns = agents::kDefaultMemoryTurns;
  bench::LatencyProfile latency;
  std::string broker_host = "127.0.0.1";
  int broker_port = 1883;
  std::string stream_id = "uav-0";
  std::string dataset = "data";
  std::string fixtures;  // empty: <dataset>/fixtures
  std::string dt_log = "dt_store.jsonl";
  int http_port = 8080;
  std::vector<int> videos;
  mulse::ActuatorLayout actuators = mulse::four_zone_layout();
  DistanceWeights dt_weights;

  bool operator==(const RunConfig& o) const {
    auto zones_equal = [](const mulse::ActuatorLayout& a, const mulse::ActuatorLayout& b) {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].id != b[i].id || a[i].bearing != b[i].bearing) return false;
      return true;
    };
    return mode == o.mode && describer == o.describer && coder == o.coder && embedding == o.embedding &&
           sampling_period == o.sampling_period && retries == o.retries && memory_turns == o.memory_turns &&
           latency == o.latency && broker_host == o.broker_host && broker_port == o.broker_port &&
           stream_id == o.stream_id && dataset == o.dataset && fixtures == o.fixtures && dt_log == o.dt_log &&
           http_port == o.http_port && videos == o.videos && zones_equal(actuators, o.actuators) &&
           dt_weights == o.dt_weights;
  }
};

inline constexpr int kBearingDecimals = 3;
inline constexpr int kWeightDecimals = 6;

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw Error(Errc::ConfigError, std::string(where) + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw Error(Errc::ConfigError, std::string(where) + ": unknown key '" + k + "'");
    }
  }
}

template <class T>
void read(const json& j, std::string_view key, T& out, std::string_view where) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::ConfigError, std::string(where) + "." + std::string(key) + ": wrong type");
  }
}

inline void read_us(const json& j, std::string_view key, Micros& out, std::string_view where) {
  std::int64_t v = out.count();
  read(j, key, v, where);
  if (v < 0) throw Error(Errc::ConfigError, std::string(where) + "." + std::string(key) + ": must be >= 0");
  out = Micros{v};
}

inline EndpointConfig read_endpoint(const json& j, EndpointConfig base, std::string_view where) {
  reject_unknown(j, where, {"model", "token_cap", "url"});
  read(j, "url", base.url, where);
  read(j, "model", base.model, where);
  read(j, "token_cap", base.token_cap, where);
  if (base.token_cap < 0) throw Error(Errc::ConfigError, std::string(where) + ".token_cap: must be >= 0");
  return base;
}

inline void write_endpoint(CanonicalJsonWriter& w, std::string_view name, const EndpointConfig& e) {
  w.key(name).begin_object();
  w.key("model").string(e.model);
  w.key("token_cap").integer(e.token_cap);
  w.key("url").string(e.url);
  w.end_object();
}

}  // namespace detail

/// Strict JSON schema: every object rejects keys it does not know, missing
/// keys keep their defaults.
inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::read;
  RunConfig c;
  detail::reject_unknown(j, "config",
                         {"actuators", "backends", "broker", "dataset", "dt", "fixtures", "http_port", "latency",
                          "memory_turns", "retries", "sampling_period", "stream_id", "videos"});
  if (j.contains("backends")) {
    const auto& b = j.at("backends");
    detail::reject_unknown(b, "backends", {"coder", "describer", "embedding", "mode"});
    std::string mode = "mock";
    read(b, "mode", mode, "backends");
    if (mode == "mock") c.mode = BackendMode::Mock;
    else if (mode == "remote") c.mode = BackendMode::Remote;
    else throw Error(Errc::ConfigError, "backends.mode: expected 'mock' or 'remote'");
    if (b.contains("describer")) c.describer = detail::read_endpoint(b.at("describer"), c.describer, "backends.describer");
    if (b.contains("coder")) c.coder = detail::read_endpoint(b.at("coder"), c.coder, "backends.coder");
    if (b.contains("embedding")) c.embedding = detail::read_endpoint(b.at("embedding"), c.embedding, "backends.embedding");
  }
  read(j, "sampling_period", c.sampling_period, "config");
  if (c.sampling_period < 1) throw Error(Errc::ConfigError, "sampling_period: must be >= 1");
  read(j, "retries", c.retries, "config");
  if (c.retries < 1) throw Error(Errc::ConfigError, "retries: must be >= 1");
  read(j, "memory_turns", c.memory_turns, "config");
  if (j.contains("latency")) {
    const auto& l = j.at("latency");
    detail::reject_unknown(l, "latency",
                           {"code_render_us", "coder_us", "describer_us", "edge_to_cloud_us", "traditional_egress_us",
                            "traditional_ingest_us", "traditional_rendering_us", "uav_to_cloud_us"});
    auto& p = c.latency;
    detail::read_us(l, "describer_us", p.describer, "latency");
    detail::read_us(l, "coder_us", p.coder, "latency");
    detail::read_us(l, "uav_to_cloud_us", p.uav_to_cloud, "latency");
    detail::read_us(l, "edge_to_cloud_us", p.edge_to_cloud, "latency");
    detail::read_us(l, "code_render_us", p.code_render, "latency");
    detail::read_us(l, "traditional_ingest_us", p.traditional.ingest, "latency");
    detail::read_us(l, "traditional_egress_us", p.traditional.egress, "latency");
    detail::read_us(l, "traditional_rendering_us", p.traditional.rendering, "latency");
  }
  if (j.contains("broker")) {
    const auto& b = j.at("broker");
    detail::reject_unknown(b, "broker", {"host", "port"});
    read(b, "host", c.broker_host, "broker");
    read(b, "port", c.broker_port, "broker");
    if (c.broker_port < 0 || c.broker_port > 65535) throw Error(Errc::ConfigError, "broker.port: out of range");
  }
  read(j, "stream_id", c.stream_id, "config");
  if (c.stream_id.empty() || c.stream_id.find_first_of("/+#") != std::string::npos) {
    throw Error(Errc::ConfigError, "stream_id: must be a single non-empty topic level");
  }
  read(j, "dataset", c.dataset, "config");
  read(j, "fixtures", c.fixtures, "config");
  read(j, "http_port", c.http_port, "config");
  if (c.http_port < 0 || c.http_port > 65535) throw Error(Errc::ConfigError, "http_port: out of range");
  read(j, "videos", c.videos, "config");
  if (j.contains("actuators")) {
    const auto& a = j.at("actuators");
    if (!a.is_array() || a.empty()) throw Error(Errc::ConfigError, "actuators: expected a non-empty array");
    c.actuators.clear();
    std::set<std::string> ids;
    for (const auto& z : a) {
      detail::reject_unknown(z, "actuators[]", {"bearing", "id"});
      mulse::Zone zone;
      read(z, "id", zone.id, "actuators[]");
      read(z, "bearing", zone.bearing, "actuators[]");
      if (zone.id.empty() || !ids.insert(zone.id).second) {
        throw Error(Errc::ConfigError, "actuators[]: zone ids must be unique and non-empty");
      }
      zone.bearing = quantize(mulse::normalize_degrees(zone.bearing), kBearingDecimals);
      c.actuators.push_back(std::move(zone));
    }
  }
  if (j.contains("dt")) {
    const auto& d = j.at("dt");
    detail::reject_unknown(d, "dt", {"horizontal_m", "log", "ms_per_unit", "vertical_m"});
    read(d, "log", c.dt_log, "dt");
    read(d, "horizontal_m", c.dt_weights.horizontal_m, "dt");
    read(d, "vertical_m", c.dt_weights.vertical_m, "dt");
    read(d, "ms_per_unit", c.dt_weights.ms_per_unit, "dt");
    auto& w = c.dt_weights;
    if (!(w.horizontal_m > 0) || !(w.vertical_m > 0) || !(w.ms_per_unit > 0)) {
      throw Error(Errc::ConfigError, "dt: distance scales must be positive");
    }
    w = {quantize(w.horizontal_m, kWeightDecimals), quantize(w.vertical_m, kWeightDecimals),
         quantize(w.ms_per_unit, kWeightDecimals)};
  }
  return c;
}

inline RunConfig parse_config_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Canonical form: every field written, keys sorted.
inline std::string serialize_config(const RunConfig& c) {
  CanonicalJsonWriter w;
  w.begin_object();
  w.key("actuators").begin_array();
  for (const auto& z : c.actuators) {
    w.begin_object();
    w.key("bearing").fixed(z.bearing, kBearingDecimals);
    w.key("id").string(z.id);
    w.end_object();
  }
  w.end_array();
  w.key("backends").begin_object();
  detail::write_endpoint(w, "coder", c.coder);
  detail::write_endpoint(w, "describer", c.describer);
  detail::write_endpoint(w, "embedding", c.embedding);
  w.key("mode").string(c.mode == BackendMode::Mock ? "mock" : "remote");
  w.end_object();
  w.key("broker").begin_object();
  w.key("host").string(c.broker_host);
  w.key("port").integer(c.broker_port);
  w.end_object();
  w.key("dataset").string(c.dataset);
  w.key("dt").begin_object();
  w.key("horizontal_m").fixed(c.dt_weights.horizontal_m, kWeightDecimals);
  w.key("log").string(c.dt_log);
  w.key("ms_per_unit").fixed(c.dt_weights.ms_per_unit, kWeightDecimals);
  w.key("vertical_m").fixed(c.dt_weights.vertical_m, kWeightDecimals);
  w.end_object();
  w.key("fixtures").string(c.fixtures);
  w.key("http_port").integer(c.http_port);
  const auto& p = c.latency;
  w.key("latency").begin_object();
  w.key("code_render_us").integer(p.code_render.count());
  w.key("coder_us").integer(p.coder.count());
  w.key("describer_us").integer(p.describer.count());
  w.key("edge_to_cloud_us").integer(p.edge_to_cloud.count());
  w.key("traditional_egress_us").integer(p.traditional.egress.count());
  w.key("traditional_ingest_us").integer(p.traditional.ingest.count());
  w.key("traditional_rendering_us").integer(p.traditional.rendering.count());
  w.key("uav_to_cloud_us").integer(p.uav_to_cloud.count());
  w.end_object();
  w.key("memory_turns").integer(c.memory_turns);
  w.key("retries").integer(c.retries);
  w.key("sampling_period").integer(c.sampling_period);
  w.key("stream_id").string(c.stream_id);
  w.key("videos").begin_array();
  for (int v : c.videos) w.integer(v);
  w.end_array();
  w.end_object();
  return w.str();
}

/// Relative paths in the config resolve against `base`.
inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline std::filesystem::path fixtures_dir(const RunConfig& c, const std::filesystem::path& base) {
  return c.fixtures.empty() ? resolve(base, c.dataset) / "fixtures" : resolve(base, c.fixtures);
}

inline bench::ComparisonOptions comparison_options(const RunConfig& c, const std::filesystem::path& base) {
  bench::ComparisonOptions o;
  o.data_dir = resolve(base, c.dataset);
  o.video_ids = c.videos;
  o.sampling_period = c.sampling_period;
  o.profile = c.latency;
  o.retries = c.retries;
  o.memory_turns = c.memory_turns;
  o.stream_id = c.stream_id;
  o.actuators = c.actuators;
  return o;
}

}  // namespace semcast::gateway
