#pragma once

#include "semcast/clock.hpp"
#include "semcast/error.hpp"
#include "semcast/json_writer.hpp"
#include "semcast/uplink/packet.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace semcast::mulse {

inline constexpr double kIsaLapseRatePerMeter = 6.5 / 1000.0;  // °C per m
inline constexpr double kDefaultBaseTemperature = 15.0;       // °C at sea level
inline constexpr double kDefaultMaxSpeed = 5.0;               // m/s
// Quadratic drag per unit mass: horizontal specific force a = k * airspeed^2.
inline constexpr double kDragPerMass = 0.04;                  // 1/m
inline constexpr double kGravity = 9.80665;
inline constexpr int kTemperatureDecimals = 2;
inline constexpr int kIntensityDecimals = 3;

struct EnvEstimate {
  double temperature = kDefaultBaseTemperature;  // °C
  double wind_speed = 0.0;                       // m/s
  double wind_direction = 0.0;                   // degrees, [0, 360)
  double confidence = 0.0;                       // [0, 1]
};

struct EnvironmentModel {
  double base_temperature = kDefaultBaseTemperature;
  double max_speed = kDefaultMaxSpeed;
  std::map<std::string, double> keyword_offsets = {{"snow", -10.0}, {"desert", 15.0}};
};

inline double normalize_degrees(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0) d += 360.0;
  return d >= 360.0 ? 0.0 : d;
}

inline std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Temperature follows the ISA lapse rate from the configured sea-level base,
/// shifted once per distinct keyword found in the description. Wind comes from
/// the horizontal specific force: the airspeed that drag would need to produce
/// it, minus ground speed. Direction is the bearing of that force in the
/// vehicle frame; a calm estimate points at 0.
inline EnvEstimate estimate_environment(const uplink::TelemetryPacket& t, std::string_view description,
                                        const EnvironmentModel& model = {}) {
  uplink::check_telemetry(t);
  EnvEstimate e;
  e.temperature = model.base_temperature - kIsaLapseRatePerMeter * t.altitude;
  const std::string text = lower_ascii(description);
  for (const auto& [word, offset] : model.keyword_offsets) {
    if (text.find(lower_ascii(word)) != std::string::npos) e.temperature += offset;
  }

  const double horizontal = std::hypot(t.accel[0], t.accel[1]);
  const double airspeed = std::sqrt(horizontal / kDragPerMass);
  e.wind_speed = std::abs(airspeed - t.ground_speed);
  e.wind_direction = horizontal > 0.0 ? normalize_degrees(std::atan2(t.accel[1], t.accel[0]) * 180.0 / std::numbers::pi)
                                      : 0.0;
  const double norm = std::sqrt(t.accel[0] * t.accel[0] + t.accel[1] * t.accel[1] + t.accel[2] * t.accel[2]);
  e.confidence = std::clamp(1.0 - std::abs(norm - kGravity) / kGravity, 0.0, 1.0);
  return e;
}

struct Zone {
  std::string id;
  double bearing = 0.0;  // degrees clockwise from the vehicle's nose
};

using ActuatorLayout = std::vector<Zone>;

inline ActuatorLayout four_zone_layout() { return {{"front", 0.0}, {"right", 90.0}, {"back", 180.0}, {"left", 270.0}}; }

struct MulsemediaFrame {
  Micros timestamp{0};
  std::map<std::string, double> thermal_zones;
  std::map<std::string, double> vibration_zones;
  bool operator==(const MulsemediaFrame&) const = default;
};

/// Weight of a zone facing `bearing` for airflow arriving from `direction`.
inline double zone_weight(double bearing, double direction) {
  return (1.0 + std::cos((bearing - direction) * std::numbers::pi / 180.0)) / 2.0;
}

inline MulsemediaFrame build_mulsemedia_map(const EnvEstimate& e, const uplink::TelemetryPacket& t,
                                            const ActuatorLayout& layout, Micros scene_timestamp,
                                            double max_speed = kDefaultMaxSpeed) {
  if (layout.empty()) throw Error(Errc::EmptyLayout, "actuator layout has no zones");
  if (!(max_speed > 0.0)) throw Error(Errc::ConfigError, "max speed must be positive");
  MulsemediaFrame f;
  f.timestamp = scene_timestamp;
  const double level = std::clamp(t.ground_speed / max_speed, 0.0, 1.0);
  for (const auto& z : layout) {
    f.thermal_zones[z.id] = quantize(e.temperature, kTemperatureDecimals);
    f.vibration_zones[z.id] = quantize(std::clamp(level * zone_weight(z.bearing, e.wind_direction), 0.0, 1.0),
                                       kIntensityDecimals);
  }
  return f;
}

inline std::string encode_frame(const MulsemediaFrame& f) {
  CanonicalJsonWriter w;
  w.begin_object();
  w.key("thermal").begin_object();
  for (const auto& [zone, c] : f.thermal_zones) w.key(zone).fixed(c, kTemperatureDecimals);
  w.end_object();
  w.key("ts").integer(f.timestamp.count());
  w.key("vibro").begin_object();
  for (const auto& [zone, v] : f.vibration_zones) w.key(zone).fixed(v, kIntensityDecimals);
  w.end_object();
  w.end_object();
  return w.take();
}

inline MulsemediaFrame decode_frame(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MulsemediaFrame f;
    f.timestamp = Micros{j.at("ts").get<std::int64_t>()};
    f.thermal_zones = j.at("thermal").get<std::map<std::string, double>>();
    f.vibration_zones = j.at("vibro").get<std::map<std::string, double>>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, std::string("mulsemedia frame: ") + e.what());
  }
}

/// Stand-in for a haptic suit: appends each frame as one JSON line.
class LoggingActuatorSink {
 public:
  explicit LoggingActuatorSink(std::ostream& out) : out_(out) {}
  void deliver(const MulsemediaFrame& f) {
    std::lock_guard lock(mutex_);
    out_ << encode_frame(f) << '\n';
    ++count_;
  }
  std::size_t delivered() const {
    std::lock_guard lock(mutex_);
    return count_;
  }

 private:
  std::ostream& out_;
  mutable std::mutex mutex_;
  std::size_t count_ = 0;
};

}  // namespace semcast::mulse
