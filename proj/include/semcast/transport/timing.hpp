#pragma once

#include "semcast/clock.hpp"
#include "semcast/error.hpp"

#include <cmath>
#include <vector>

namespace semcast::transport {

/// One request/response exchange: local send, remote receive, remote send,
/// local receive. t1/t4 are on the local clock, t2/t3 on the remote one.
struct TimesyncSample {
  Micros t1{0}, t2{0}, t3{0}, t4{0};
};

struct ClockOffset {
  double offset_ms = 0.0;      // remote - local
  double dispersion_ms = 0.0;  // population stddev across samples
  std::size_t sample_count = 0;

  Micros offset() const { return Micros{std::llround(offset_ms * 1000.0)}; }
  /// Maps a local timestamp onto the remote clock.
  Micros to_remote(Micros local) const { return local + offset(); }
  Micros to_local(Micros remote) const { return remote - offset(); }
};

inline ClockOffset sync_clocks(const std::vector<TimesyncSample>& samples) {
  if (samples.empty()) throw Error(Errc::NoSamples, "clock sync needs at least one exchange");
  std::vector<double> offsets;
  offsets.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.t4 < s.t1 || s.t3 < s.t2) throw Error(Errc::NonMonotoneSample, "exchange timestamps run backwards");
    const auto twice = (s.t2 - s.t1) + (s.t3 - s.t4);
    offsets.push_back(static_cast<double>(twice.count()) / 2.0 / 1000.0);
  }
  double mean = 0.0;
  for (double o : offsets) mean += o;
  mean /= static_cast<double>(offsets.size());
  double var = 0.0;
  for (double o : offsets) var += (o - mean) * (o - mean);
  var /= static_cast<double>(offsets.size());
  return {mean, std::sqrt(var), samples.size()};
}

inline Millis one_way_latency(Millis rtt) {
  if (rtt.count() < 0.0 || std::isnan(rtt.count())) throw Error(Errc::NegativeRtt, "round trip time is negative");
  return rtt / 2.0;
}

}  // namespace semcast::transport
