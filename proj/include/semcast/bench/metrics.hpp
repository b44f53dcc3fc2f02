#pragma once

#include "semcast/baseline/traditional.hpp"
#include "semcast/clock.hpp"
#include "semcast/error.hpp"

#include <optional>

namespace semcast::bench {

/// Generation, delivery and rendering spans of the semantic pipeline, in
/// whole microseconds.
struct LatencyBreakdownSemantic {
  Micros text_to_code{0};
  Micros delivery{0};
  Micros rendering{0};
};

inline Micros e2e_latency_semantic(const LatencyBreakdownSemantic& b) {
  if (b.text_to_code.count() < 0 || b.delivery.count() < 0 || b.rendering.count() < 0) {
    throw Error(Errc::NegativeComponent, "semantic latency component below zero");
  }
  return b.text_to_code + b.delivery + b.rendering;
}

/// Link and processing delays for a desk run. Backend figures are what the
/// mock backends inject; a remote run measures them instead.
struct LatencyProfile {
  Micros describer{4'600'000};
  Micros coder{9'000'000};
  Micros uav_to_cloud{48'000};
  Micros edge_to_cloud{2'000};
  Micros code_render{10'000};
  baseline::LatencyBreakdownTraditional traditional = baseline::default_traditional_profile();

  /// Scene code goes cloud -> broker -> headset: one fixed-link hop and one
  /// mobile-link hop.
  Micros code_delivery() const { return edge_to_cloud + uav_to_cloud; }

  bool operator==(const LatencyProfile& o) const {
    return describer == o.describer && coder == o.coder && uav_to_cloud == o.uav_to_cloud &&
           edge_to_cloud == o.edge_to_cloud && code_render == o.code_render &&
           traditional.ingest == o.traditional.ingest && traditional.egress == o.traditional.egress &&
           traditional.rendering == o.traditional.rendering;
  }
};

/// Percent saved by `ours` relative to `baseline`.
inline double bandwidth_reduction(double baseline_bps, double ours_bps) {
  if (!(baseline_bps > 0.0)) throw Error(Errc::ZeroBaseline, "baseline bitrate must be positive");
  if (ours_bps < 0.0 || ours_bps > baseline_bps) {
    throw Error(Errc::OursExceedsBaseline, "semantic bitrate outside [0, baseline]");
  }
  return 100.0 * (1.0 - ours_bps / baseline_bps);
}

struct RDPoint {
  double rate_bps = 0.0;
  double distortion = 0.0;
  std::optional<double> lambda_weight;  // carried through, not used
};

}  // namespace semcast::bench
