#pragma once

#include "semcast/clock.hpp"
#include "semcast/error.hpp"
#include "semcast/uplink/packet.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>

namespace semcast::uplink {

/// Flight-controller sample in autopilot integer units: GLOBAL_POSITION_INT
/// position/velocity plus SCALED_IMU accelerometer and gyro.
struct RawSensorSample {
  std::int32_t lat_e7 = 0;      // degE7
  std::int32_t lon_e7 = 0;      // degE7
  std::int32_t alt_mm = 0;      // mm above MSL
  std::int16_t vx_cms = 0;      // cm/s north
  std::int16_t vy_cms = 0;      // cm/s east
  std::int16_t vz_cms = 0;      // cm/s down
  std::array<std::int16_t, 3> accel_mg{};     // milli-g
  std::array<std::int16_t, 3> gyro_mrads{};   // mrad/s
  std::uint64_t time_boot_us = 0;
};

inline constexpr double kStandardGravity = 9.80665;

/// Normalizes units and maps vehicle boot time onto the synchronized clock
/// (`boot_to_sync` is the offset learned by the clock sync exchange).
inline TelemetryPacket encode_telemetry(const RawSensorSample& raw, Micros boot_to_sync = Micros{0},
                                        double altitude_floor = kDefaultAltitudeFloor) {
  TelemetryPacket t;
  t.latitude = raw.lat_e7 / 1e7;
  t.longitude = raw.lon_e7 / 1e7;
  t.altitude = raw.alt_mm / 1000.0;
  t.ground_speed = std::hypot(raw.vx_cms / 100.0, raw.vy_cms / 100.0);
  for (int i = 0; i < 3; ++i) {
    t.accel[i] = raw.accel_mg[i] / 1000.0 * kStandardGravity;
    t.gyro[i] = raw.gyro_mrads[i] / 1000.0;
  }
  t.timestamp = Micros{static_cast<std::int64_t>(raw.time_boot_us)} + boot_to_sync;
  check_telemetry(t, altitude_floor);
  return quantized(t);
}

/// Per-source encoder that also enforces strictly increasing timestamps.
class TelemetryEncoder {
 public:
  explicit TelemetryEncoder(Micros boot_to_sync = Micros{0}, double altitude_floor = kDefaultAltitudeFloor)
      : offset_(boot_to_sync), floor_(altitude_floor) {}

  void set_offset(Micros boot_to_sync) {
    std::lock_guard lock(mutex_);
    offset_ = boot_to_sync;
  }

  TelemetryPacket encode(const std::string& source_id, const RawSensorSample& raw) {
    std::lock_guard lock(mutex_);
    TelemetryPacket t = encode_telemetry(raw, offset_, floor_);
    admit_locked(source_id, t.timestamp);
    return t;
  }

  /// For packets that arrive already normalized (trace replay).
  void admit(const std::string& source_id, Micros ts) {
    std::lock_guard lock(mutex_);
    admit_locked(source_id, ts);
  }

 private:
  void admit_locked(const std::string& source_id, Micros ts) {
    auto it = last_.find(source_id);
    if (it != last_.end() && ts <= it->second) {
      throw Error(Errc::TimestampRegression, source_id + " timestamp " + std::to_string(ts.count()) +
                                                 " after " + std::to_string(it->second.count()));
    }
    last_[source_id] = ts;
  }

  std::mutex mutex_;
  Micros offset_;
  double floor_;
  std::map<std::string, Micros> last_;
};

}  // namespace semcast::uplink
