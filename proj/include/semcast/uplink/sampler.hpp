#pragma once

#include "semcast/clock.hpp"
#include "semcast/error.hpp"
#include "semcast/uplink/packet.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace semcast::uplink {

inline constexpr std::uint32_t kDefaultSamplingPeriod = 30;

/// Tickets for frames 0, P, 2P, ... strictly below duration * frame_rate.
/// Capture timestamps are `start + index / frame_rate`.
inline std::vector<FrameTicket> sample_frames(double frame_rate, std::uint32_t sampling_period, double duration_s,
                                              const std::string& source_id = "uav-0", Micros start = Micros{0}) {
  if (sampling_period < 1) throw Error(Errc::InvalidPeriod, "sampling period must be >= 1");
  if (!(frame_rate > 0.0)) throw Error(Errc::InvalidArgument, "frame rate must be positive");
  if (!(duration_s > 0.0)) throw Error(Errc::ZeroDuration, "duration must be positive");

  const double frame_total = frame_rate * duration_s;
  std::vector<FrameTicket> out;
  out.reserve(static_cast<std::size_t>(std::ceil(frame_total / sampling_period)));
  for (std::uint64_t index = 0; static_cast<double>(index) < frame_total; index += sampling_period) {
    const auto offset = static_cast<std::int64_t>(std::llround(static_cast<double>(index) * 1e6 / frame_rate));
    out.push_back({index, start + Micros{offset}, source_id});
  }
  return out;
}

}  // namespace semcast::uplink
