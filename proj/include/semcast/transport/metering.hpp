#pragma once

#include "semcast/clock.hpp"
#include "semcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace semcast::transport {

enum class Direction { Uplink, Downlink, Control };

inline constexpr std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Uplink: return "uplink";
    case Direction::Downlink: return "downlink";
    case Direction::Control: return "control";
  }
  return "?";
}

struct ChannelReceipt {
  std::string route;  // topic or HTTP path
  std::size_t payload_bytes = 0;
  Micros t_send{0};
  Micros t_recv{0};
  Direction direction = Direction::Uplink;
};

struct BitrateStats {
  double window_s = 0.0;
  double mean_bps = 0.0;
  double max_bps = 0.0;     // busiest one-second bin
  double stddev_bps = 0.0;  // across one-second bins
  std::uint64_t byte_total = 0;
  std::size_t receipt_count = 0;
};

inline constexpr Micros kMeterBin{1'000'000};

/// Aggregates receipts of one direction whose send time falls in
/// [start, start + window). Receipts outside the window are ignored.
inline BitrateStats meter_bandwidth(const std::vector<ChannelReceipt>& receipts, Direction direction, Micros start,
                                    Micros window) {
  if (window.count() <= 0) throw Error(Errc::InvalidArgument, "metering window must be positive");
  const std::size_t bins = static_cast<std::size_t>((window.count() + kMeterBin.count() - 1) / kMeterBin.count());
  std::vector<std::uint64_t> per_bin(bins, 0);
  BitrateStats s;
  for (const auto& r : receipts) {
    if (r.direction != direction) continue;
    const auto offset = r.t_send - start;
    if (offset.count() < 0 || offset >= window) continue;
    per_bin[static_cast<std::size_t>(offset.count() / kMeterBin.count())] += r.payload_bytes;
    s.byte_total += r.payload_bytes;
    ++s.receipt_count;
  }
  if (s.receipt_count == 0) throw Error(Errc::EmptyWindow, "no " + std::string(to_string(direction)) + " receipts");

  s.window_s = static_cast<double>(window.count()) / 1e6;
  s.mean_bps = static_cast<double>(s.byte_total) * 8.0 / s.window_s;
  std::vector<double> rates(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const auto bin_len = std::min(kMeterBin, window - kMeterBin * static_cast<std::int64_t>(i));
    rates[i] = static_cast<double>(per_bin[i]) * 8.0 / (static_cast<double>(bin_len.count()) / 1e6);
  }
  s.max_bps = *std::max_element(rates.begin(), rates.end());
  double var = 0.0;
  for (double r : rates) var += (r - s.mean_bps) * (r - s.mean_bps);
  s.stddev_bps = std::sqrt(var / static_cast<double>(bins));
  return s;
}

/// Window spanning every receipt of `direction`, rounded out to whole seconds.
inline BitrateStats meter_bandwidth(const std::vector<ChannelReceipt>& receipts, Direction direction) {
  Micros lo = Micros::max(), hi = Micros::min();
  for (const auto& r : receipts) {
    if (r.direction != direction) continue;
    lo = std::min(lo, r.t_send);
    hi = std::max(hi, r.t_send);
  }
  if (lo > hi) throw Error(Errc::EmptyWindow, "no " + std::string(to_string(direction)) + " receipts");
  const auto span = hi - lo + Micros{1};
  const auto whole = (span.count() + kMeterBin.count() - 1) / kMeterBin.count();
  return meter_bandwidth(receipts, direction, lo, kMeterBin * whole);
}

}  // namespace semcast::transport

namespace semcast::transport {

/// Per-second bitrate of one direction over `seconds` bins starting at `start`.
inline std::vector<double> bitrate_series(const std::vector<ChannelReceipt>& receipts, Direction direction,
                                          Micros start, std::size_t seconds) {
  std::vector<double> bps(seconds, 0.0);
  for (const auto& r : receipts) {
    if (r.direction != direction || r.t_send < start) continue;
    const auto bin = static_cast<std::size_t>((r.t_send - start).count() / kMeterBin.count());
    if (bin < seconds) bps[bin] += static_cast<double>(r.payload_bytes) * 8.0;
  }
  return bps;
}

}  // namespace semcast::transport
