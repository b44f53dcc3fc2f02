#pragma once

#include "semcast/clock.hpp"
#include "semcast/error.hpp"
#include "semcast/json_writer.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace semcast::uplink {

// Fixed decimal places of the canonical encoding.
inline constexpr int kDegreeDecimals = 6;
inline constexpr int kMeterDecimals = 2;
inline constexpr int kSpeedDecimals = 2;
inline constexpr int kAccelDecimals = 2;
inline constexpr int kGyroDecimals = 4;
inline constexpr int kConfidenceDecimals = 2;
inline constexpr int kBoxDecimals = 3;

inline constexpr double kDefaultAltitudeFloor = -430.0;

struct FrameTicket {
  std::uint64_t frame_index = 0;
  Micros capture_timestamp{0};
  std::string source_id;
  bool operator==(const FrameTicket&) const = default;
};

struct Detection {
  std::string label;
  double confidence = 0.0;
  std::array<double, 4> box{};  // x, y, w, h normalized to the frame
  bool operator==(const Detection&) const = default;
};

using DetectionSet = std::vector<Detection>;

struct Caption {
  std::string text;
  std::string model_id;
  bool operator==(const Caption&) const = default;
};

struct TelemetryPacket {
  double altitude = 0.0;   // m
  double latitude = 0.0;   // deg
  double longitude = 0.0;  // deg
  double ground_speed = 0.0;          // m/s
  std::array<double, 3> accel{};      // m/s^2
  std::array<double, 3> gyro{};       // rad/s
  Micros timestamp{0};                // synchronized clock
  bool operator==(const TelemetryPacket&) const = default;
};

struct AnnotationPacket {
  FrameTicket frame;
  DetectionSet detections;
  Caption caption;
  TelemetryPacket telemetry;
  std::size_t encoded_bytes = 0;
  bool operator==(const AnnotationPacket&) const = default;
};

// ---- invariants ------------------------------------------------------------

inline void check_detections(const DetectionSet& set) {
  for (const auto& d : set) {
    if (d.label.empty()) throw Error(Errc::OutOfRange, "detection without label");
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
      throw Error(Errc::OutOfRange, "confidence " + std::to_string(d.confidence) + " for " + d.label);
    }
    const auto [x, y, w, h] = d.box;
    const bool inside = x >= 0.0 && y >= 0.0 && w >= 0.0 && h >= 0.0 && x + w <= 1.0 + 1e-9 && y + h <= 1.0 + 1e-9;
    if (!inside) throw Error(Errc::OutOfRange, "box outside the unit square for " + d.label);
  }
}

inline void check_telemetry(const TelemetryPacket& t, double altitude_floor = kDefaultAltitudeFloor) {
  if (!(std::abs(t.latitude) <= 90.0)) throw Error(Errc::OutOfRange, "latitude " + std::to_string(t.latitude));
  if (!(std::abs(t.longitude) <= 180.0)) throw Error(Errc::OutOfRange, "longitude " + std::to_string(t.longitude));
  if (!(t.altitude >= altitude_floor)) throw Error(Errc::OutOfRange, "altitude " + std::to_string(t.altitude));
  if (!(t.ground_speed >= 0.0)) throw Error(Errc::OutOfRange, "ground speed " + std::to_string(t.ground_speed));
}

// ---- quantization ----------------------------------------------------------

inline TelemetryPacket quantized(TelemetryPacket t) {
  t.altitude = quantize(t.altitude, kMeterDecimals);
  t.latitude = quantize(t.latitude, kDegreeDecimals);
  t.longitude = quantize(t.longitude, kDegreeDecimals);
  t.ground_speed = quantize(t.ground_speed, kSpeedDecimals);
  for (auto& a : t.accel) a = quantize(a, kAccelDecimals);
  for (auto& g : t.gyro) g = quantize(g, kGyroDecimals);
  return t;
}

inline Detection quantized(Detection d) {
  d.confidence = quantize(d.confidence, kConfidenceDecimals);
  for (auto& b : d.box) b = quantize(b, kBoxDecimals);
  return d;
}

// ---- canonical encoding ----------------------------------------------------

inline void write_telemetry(CanonicalJsonWriter& w, const TelemetryPacket& t) {
  w.begin_object();
  w.key("accel").begin_array();
  for (double a : t.accel) w.fixed(a, kAccelDecimals);
  w.end_array();
  w.key("alt").fixed(t.altitude, kMeterDecimals);
  w.key("gyro").begin_array();
  for (double g : t.gyro) w.fixed(g, kGyroDecimals);
  w.end_array();
  w.key("lat").fixed(t.latitude, kDegreeDecimals);
  w.key("lon").fixed(t.longitude, kDegreeDecimals);
  w.key("speed").fixed(t.ground_speed, kSpeedDecimals);
  w.key("ts").integer(t.timestamp.count());
  w.end_object();
}

inline std::string encode_telemetry_json(const TelemetryPacket& t) {
  CanonicalJsonWriter w;
  write_telemetry(w, t);
  return w.take();
}

inline void write_detection(CanonicalJsonWriter& w, const Detection& d) {
  w.begin_object();
  w.key("box").begin_array();
  for (double b : d.box) w.fixed(b, kBoxDecimals);
  w.end_array();
  w.key("conf").fixed(d.confidence, kConfidenceDecimals);
  w.key("label").string(d.label);
  w.end_object();
}

/// Canonical wire form: sorted keys, no whitespace, fixed precision.
inline std::string encode_packet(const AnnotationPacket& p) {
  CanonicalJsonWriter w;
  w.begin_object();
  w.key("caption").begin_object();
  w.key("model").string(p.caption.model_id);
  w.key("text").string(p.caption.text);
  w.end_object();
  w.key("detections").begin_array();
  for (const auto& d : p.detections) write_detection(w, d);
  w.end_array();
  w.key("frame").begin_object();
  w.key("index").integer(static_cast<std::int64_t>(p.frame.frame_index));
  w.key("source").string(p.frame.source_id);
  w.key("ts").integer(p.frame.capture_timestamp.count());
  w.end_object();
  w.key("telemetry");
  write_telemetry(w, p.telemetry);
  w.end_object();
  return w.take();
}

// ---- decoding --------------------------------------------------------------

inline TelemetryPacket telemetry_from_json(const nlohmann::json& j) {
  TelemetryPacket t;
  t.altitude = j.at("alt").get<double>();
  t.latitude = j.at("lat").get<double>();
  t.longitude = j.at("lon").get<double>();
  t.ground_speed = j.at("speed").get<double>();
  t.accel = j.at("accel").get<std::array<double, 3>>();
  t.gyro = j.at("gyro").get<std::array<double, 3>>();
  t.timestamp = Micros{j.at("ts").get<std::int64_t>()};
  return t;
}

inline Detection detection_from_json(const nlohmann::json& j) {
  return {j.at("label").get<std::string>(), j.at("conf").get<double>(), j.at("box").get<std::array<double, 4>>()};
}

inline AnnotationPacket decode_packet(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    AnnotationPacket p;
    p.caption = {j.at("caption").at("text").get<std::string>(), j.at("caption").at("model").get<std::string>()};
    for (const auto& d : j.at("detections")) p.detections.push_back(detection_from_json(d));
    const auto& f = j.at("frame");
    p.frame = {f.at("index").get<std::uint64_t>(), Micros{f.at("ts").get<std::int64_t>()},
               f.at("source").get<std::string>()};
    p.telemetry = telemetry_from_json(j.at("telemetry"));
    p.encoded_bytes = text.size();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, std::string("annotation packet: ") + e.what());
  }
}

/// Assembles the uplink payload. Values are quantized to the wire precision
/// so that decode(encode(p)) == p holds exactly.
inline AnnotationPacket build_annotation_packet(const DetectionSet& detections, const Caption& caption,
                                                const TelemetryPacket& telemetry, const FrameTicket& frame) {
  check_detections(detections);
  check_telemetry(telemetry);
  if (caption.text.empty()) throw Error(Errc::InvalidArgument, "empty caption");
  AnnotationPacket p;
  p.frame = frame;
  p.caption = caption;
  p.telemetry = quantized(telemetry);
  p.detections.reserve(detections.size());
  for (const auto& d : detections) p.detections.push_back(quantized(d));
  p.encoded_bytes = encode_packet(p).size();
  return p;
}

}  // namespace semcast::uplink
