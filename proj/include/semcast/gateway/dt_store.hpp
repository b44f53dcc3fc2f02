#pragma once

#include "semcast/clock.hpp"
#include "semcast/error.hpp"
#include "semcast/gateway/config.hpp"
#include "semcast/hash.hpp"
#include "semcast/json_writer.hpp"
#include "semcast/uplink/packet.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <shared_mutex>

namespace semcast::gateway {

struct Pose {
  double lat = 0.0;  // deg
  double lon = 0.0;  // deg
  double alt = 0.0;  // m
  bool operator==(const Pose&) const = default;
};

struct DTEntry {
  std::string scene;
  Pose pose;
  Micros timestamp{0};
  std::string stream;
  std::string description_hash;
  bool operator==(const DTEntry&) const = default;
};

struct StoredEntry {
  std::uint64_t key = 0;
  DTEntry entry;
};

inline constexpr double kEarthRadiusM = 6'371'008.8;

/// Equirectangular ground distance in metres; accurate at the few-km scale
/// a single flight covers.
inline double horizontal_distance_m(const Pose& a, const Pose& b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double mean_lat = (a.lat + b.lat) * 0.5 * rad;
  double dlon = b.lon - a.lon;
  if (dlon > 180.0) dlon -= 360.0;
  if (dlon < -180.0) dlon += 360.0;
  const double x = dlon * rad * std::cos(mean_lat) * kEarthRadiusM;
  const double y = (b.lat - a.lat) * rad * kEarthRadiusM;
  return std::hypot(x, y);
}

inline double time_distance(Micros a, Micros b, const DistanceWeights& w) {
  return std::abs(to_ms(a - b)) / w.ms_per_unit;
}

inline double dt_distance(const Pose& a, Micros ta, const Pose& b, Micros tb, const DistanceWeights& w) {
  const double h = horizontal_distance_m(a, b) / w.horizontal_m;
  const double v = (a.alt - b.alt) / w.vertical_m;
  const double t = time_distance(ta, tb, w);
  return std::sqrt(h * h + v * v + t * t);
}

/// Pose bounds are the telemetry bounds; values are stored quantized.
inline DTEntry validated(DTEntry e) {
  uplink::TelemetryPacket t;
  t.latitude = e.pose.lat;
  t.longitude = e.pose.lon;
  t.altitude = e.pose.alt;
  uplink::check_telemetry(t);
  if (e.scene.empty()) throw Error(Errc::InvalidArgument, "DT entry without scene code");
  if (e.stream.empty()) throw Error(Errc::InvalidArgument, "DT entry without stream id");
  if (e.timestamp.count() < 0) throw Error(Errc::InvalidArgument, "DT entry timestamp before epoch");
  try {
    (void)nlohmann::json(e.scene).dump();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::InvalidArgument, "DT scene text is not UTF-8");
  }
  t = uplink::quantized(t);
  e.pose = {t.latitude, t.longitude, t.altitude};
  return e;
}

/// One log line per entry, keys sorted; `prev` is the SHA-256 of the previous
/// line (empty for the first), so any rewrite of history breaks the chain.
inline std::string encode_dt_line(const StoredEntry& s, std::string_view prev) {
  const auto& e = s.entry;
  CanonicalJsonWriter w;
  w.begin_object();
  w.key("alt").fixed(e.pose.alt, uplink::kMeterDecimals);
  w.key("description_hash").string(e.description_hash);
  w.key("key").integer(static_cast<std::int64_t>(s.key));
  w.key("lat").fixed(e.pose.lat, uplink::kDegreeDecimals);
  w.key("lon").fixed(e.pose.lon, uplink::kDegreeDecimals);
  w.key("prev").string(prev);
  w.key("scene").string(e.scene);
  w.key("stream").string(e.stream);
  w.key("timestamp_us").integer(e.timestamp.count());
  w.end_object();
  return w.str();
}

/// Append-only scene store. One writer at a time; lookups take a shared lock
/// and may run concurrently. A store opened without a path lives in memory.
class DTStore {
 public:
  DTStore() = default;

  explicit DTStore(std::filesystem::path log_path) : path_(std::move(log_path)) {
    load();
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw Error(Errc::StorageFailure, "cannot open " + path_.string() + " for append");
  }

  std::uint64_t store_scene(DTEntry entry) {
    entry = validated(std::move(entry));
    std::unique_lock lock(mu_);
    const auto id = std::make_pair(entry.timestamp.count(), entry.stream);
    if (ids_.count(id)) {
      throw Error(Errc::DuplicateKey, "scene already stored for stream " + entry.stream + " at " +
                                          std::to_string(entry.timestamp.count()) + " us");
    }
    StoredEntry s{entries_.size() + 1, std::move(entry)};
    if (!path_.empty()) {
      std::string line = encode_dt_line(s, last_line_hash_);
      out_ << line << '\n';
      out_.flush();
      if (!out_) throw Error(Errc::StorageFailure, "write to " + path_.string() + " failed");
      last_line_hash_ = sha256_hex(line);
    }
    index(std::move(s));
    return entries_.size();
  }

  /// Keys count from 1 in insertion order.
  DTEntry fetch(std::uint64_t key) const {
    std::shared_lock lock(mu_);
    if (key == 0 || key > entries_.size()) throw Error(Errc::OutOfRange, "no DT entry " + std::to_string(key));
    return entries_[key - 1].entry;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
  }

  /// Hash of the newest log line; ties reports to the store state.
  std::string head_hash() const {
    std::shared_lock lock(mu_);
    return last_line_hash_;
  }

  /// Entry with the smallest weighted pose and time distance. Equal distances
  /// go to the earlier timestamp, then to the lower key.
  StoredEntry query_nearest(const Pose& pose, Micros time, const DistanceWeights& w = {}) const {
    std::shared_lock lock(mu_);
    if (entries_.empty()) throw Error(Errc::EmptyStore, "DT store is empty");
    std::optional<std::size_t> best;
    double best_d = 0.0;
    auto consider = [&](std::size_t i) {
      const auto& e = entries_[i].entry;
      const double d = dt_distance(pose, time, e.pose, e.timestamp, w);
      if (!best || better(d, i, best_d, *best)) {
        best = i;
        best_d = d;
      }
    };
    // Walk outward in time from the query; the time term alone bounds the
    // total distance from below, so each side stops once it exceeds the best.
    const auto split = std::lower_bound(by_time_.begin(), by_time_.end(), time,
                                        [&](std::size_t i, Micros t) { return entries_[i].entry.timestamp < t; });
    auto hi = split;
    auto lo = split;
    bool up = hi != by_time_.end();
    bool down = lo != by_time_.begin();
    while (up || down) {
      if (up) {
        if (best && time_distance(entries_[*hi].entry.timestamp, time, w) > best_d) {
          up = false;
        } else {
          consider(*hi);
          up = ++hi != by_time_.end();
        }
      }
      if (down) {
        const auto i = *std::prev(lo);
        if (best && time_distance(entries_[i].entry.timestamp, time, w) > best_d) {
          down = false;
        } else {
          consider(i);
          down = --lo != by_time_.begin();
        }
      }
    }
    return entries_[*best];
  }

  std::vector<StoredEntry> snapshot() const {
    std::shared_lock lock(mu_);
    return entries_;
  }

 private:
  bool better(double d, std::size_t i, double best_d, std::size_t best) const {
    if (d != best_d) return d < best_d;
    const auto ti = entries_[i].entry.timestamp, tb = entries_[best].entry.timestamp;
    if (ti != tb) return ti < tb;
    return i < best;
  }

  void index(StoredEntry s) {
    ids_.emplace(s.entry.timestamp.count(), s.entry.stream);
    const std::size_t pos = entries_.size();
    const Micros t = s.entry.timestamp;
    entries_.push_back(std::move(s));
    // upper_bound keeps equal timestamps in key order
    const auto at = std::upper_bound(by_time_.begin(), by_time_.end(), t,
                                     [&](Micros v, std::size_t i) { return v < entries_[i].entry.timestamp; });
    by_time_.insert(at, pos);
  }

  void load() {
    if (!std::filesystem::exists(path_)) return;
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw Error(Errc::StorageFailure, "cannot read " + path_.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      if (nl == std::string::npos) {
        // A crash mid-append leaves an unterminated tail; drop it.
        std::filesystem::resize_file(path_, pos);
        break;
      }
      const std::string line = text.substr(pos, nl - pos);
      ++line_no;
      pos = nl + 1;
      auto fail = [&](const std::string& why) {
        return Error(Errc::StorageFailure, path_.string() + ":" + std::to_string(line_no) + ": " + why);
      };
      StoredEntry s;
      std::string prev;
      try {
        const auto j = nlohmann::json::parse(line);
        s.key = j.at("key").get<std::uint64_t>();
        prev = j.at("prev").get<std::string>();
        s.entry.scene = j.at("scene").get<std::string>();
        s.entry.stream = j.at("stream").get<std::string>();
        s.entry.description_hash = j.at("description_hash").get<std::string>();
        s.entry.timestamp = Micros{j.at("timestamp_us").get<std::int64_t>()};
        s.entry.pose = {j.at("lat").get<double>(), j.at("lon").get<double>(), j.at("alt").get<double>()};
      } catch (const nlohmann::json::exception& e) {
        throw fail(std::string("malformed entry: ") + e.what());
      }
      if (s.key != entries_.size() + 1) throw fail("key out of sequence");
      if (prev != last_line_hash_) throw fail("hash chain broken");
      if (encode_dt_line(s, prev) != line) throw fail("entry is not in canonical form");
      if (ids_.count({s.entry.timestamp.count(), s.entry.stream})) throw fail("duplicate (timestamp, stream)");
      last_line_hash_ = sha256_hex(line);
      index(std::move(s));
    }
  }

  std::filesystem::path path_;
  std::ofstream out_;
  mutable std::shared_mutex mu_;
  std::vector<StoredEntry> entries_;
  std::vector<std::size_t> by_time_;  // entry positions sorted by timestamp
  std::set<std::pair<std::int64_t, std::string>> ids_;
  std::string last_line_hash_;
};

}  // namespace semcast::gateway
