#include "semcast/baseline/traditional.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace semcast;
using namespace semcast::baseline;

namespace {

const std::filesystem::path kData = SEMCAST_DATA_DIR;

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no semcast::Error raised";
  return Errc::InvalidArgument;
}

VideoTrace flat(int seconds, std::uint64_t up, std::uint64_t down) {
  VideoTrace t;
  t.video_id = 99;
  t.duration_s = seconds;
  t.uplink_bps.assign(static_cast<std::size_t>(seconds), up);
  t.downlink_bps.assign(static_cast<std::size_t>(seconds), down);
  return t;
}

}  // namespace

TEST(Catalog, ListsTenVideosNineBenchmarked) {
  const auto all = load_catalog(kData);
  ASSERT_EQ(all.size(), 10u);
  const auto bench = benchmark_videos(all);
  EXPECT_EQ(bench.size(), 9u);
  for (const auto& v : bench) EXPECT_FALSE(v.baseline_trace.empty()) << v.id;
  EXPECT_EQ(code_of([] { load_catalog("/nonexistent"); }), Errc::DatasetMissing);
}

TEST(Replay, FlatUplinkMetersAtRecordedRate) {
  const auto receipts = replay_receipts(flat(10, 5'900'000, 5'800'000));
  const auto up = transport::meter_bandwidth(receipts, Direction::Uplink, Micros{0}, Micros{10'000'000});
  const auto down = transport::meter_bandwidth(receipts, Direction::Downlink, Micros{0}, Micros{10'000'000});
  EXPECT_NEAR(up.mean_bps, 5.9e6, 5.9e4);
  EXPECT_NEAR(down.mean_bps, 5.8e6, 5.8e4);
  EXPECT_EQ(up.receipt_count, 300u);
}

TEST(Replay, ZeroRateEmitsNothing) {
  std::size_t n = 0;
  EXPECT_EQ(replay_trace(flat(5, 0, 0), [&](const ChannelReceipt&) { ++n; }), 0u);
  EXPECT_EQ(n, 0u);
}

TEST(Replay, RejectsEmptyTraceAndBadSpeed) {
  EXPECT_EQ(code_of([] { replay_receipts(flat(0, 1, 1)); }), Errc::EmptyTrace);
  EXPECT_EQ(code_of([] { replay_receipts(flat(1, 1, 1), {0.0}); }), Errc::InvalidArgument);
}

TEST(Replay, BundledTracesReproducedAtEverySecond) {
  for (const auto& v : benchmark_videos(load_catalog(kData))) {
    const auto trace = load_trace(v.baseline_trace);
    EXPECT_EQ(trace.duration_s, v.duration_s);
    const auto receipts = replay_receipts(trace);
    const auto n = trace.uplink_bps.size();
    const auto up = transport::bitrate_series(receipts, Direction::Uplink, Micros{0}, n);
    const auto down = transport::bitrate_series(receipts, Direction::Downlink, Micros{0}, n);
    for (std::size_t s = 0; s < n; ++s) {
      EXPECT_NEAR(up[s], static_cast<double>(trace.uplink_bps[s]), 0.01 * trace.uplink_bps[s]) << v.id << "@" << s;
      EXPECT_NEAR(down[s], static_cast<double>(trace.downlink_bps[s]), 0.01 * trace.downlink_bps[s]) << v.id << "@" << s;
    }
  }
}

TEST(Replay, RandomTracesWithinOnePercentProperty) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> rate(1'000, 20'000'000);
  std::uniform_int_distribution<int> len(1, 40);
  for (int trial = 0; trial < 50; ++trial) {
    VideoTrace t = flat(len(rng), 0, 0);
    for (std::size_t s = 0; s < t.uplink_bps.size(); ++s) {
      t.uplink_bps[s] = rate(rng);
      t.downlink_bps[s] = std::uniform_int_distribution<std::uint64_t>(0, t.uplink_bps[s])(rng);
    }
    const auto receipts = replay_receipts(t, {std::numeric_limits<double>::infinity(), Micros{7'000'000}});
    const auto up = transport::bitrate_series(receipts, Direction::Uplink, Micros{7'000'000}, t.uplink_bps.size());
    for (std::size_t s = 0; s < up.size(); ++s) EXPECT_NEAR(up[s], t.uplink_bps[s], 0.01 * t.uplink_bps[s]);
  }
}

TEST(Replay, PacedReplayTakesScaledWallTime) {
  const auto start = std::chrono::steady_clock::now();
  replay_trace(flat(2, 8000, 8000), [](const ChannelReceipt&) {}, {20.0, Micros{0}});
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, std::chrono::milliseconds(90));
}

TEST(BaselineSet, AggregatesToPublishedMeans) {
  const auto traces = load_baseline_set(benchmark_videos(load_catalog(kData)));
  ASSERT_EQ(traces.size(), 9u);
  double up = 0, down = 0;
  for (const auto& t : traces) {
    const auto receipts = replay_receipts(t);
    up += transport::meter_bandwidth(receipts, Direction::Uplink).mean_bps;
    down += transport::meter_bandwidth(receipts, Direction::Downlink).mean_bps;
  }
  EXPECT_NEAR(up / 9, 5.9e6, 0.02 * 5.9e6);
  EXPECT_NEAR(down / 9, 5.8e6, 0.02 * 5.8e6);
}

TEST(TraceValidation, RejectsInconsistentSeries) {
  auto t = flat(3, 100, 100);
  t.downlink_bps[1] = 101;
  EXPECT_EQ(code_of([&] { validate(t); }), Errc::ParseFailure);
  t = flat(3, 100, 100);
  t.uplink_bps.pop_back();
  EXPECT_EQ(code_of([&] { validate(t); }), Errc::ParseFailure);
  EXPECT_EQ(code_of([] { parse_trace(nlohmann::json::object({{"video_id", 1}})); }), Errc::ParseFailure);
}

TEST(TraditionalLatency, SumsComponents) {
  EXPECT_EQ(e2e_latency_traditional({}), Micros{0});
  EXPECT_EQ(e2e_latency_traditional(default_traditional_profile()), Micros{980'000});
  EXPECT_EQ(e2e_latency_traditional({Micros{100'000}, Micros{580'000}, Micros{300'000}}), Micros{980'000});
  EXPECT_EQ(code_of([] { e2e_latency_traditional({Micros{-1}, Micros{0}, Micros{0}}); }), Errc::NegativeComponent);
}

TEST(TraditionalLatency, AdditiveAndPermutationInvariantProperty) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> part(0, 10'000'000'000);
  for (int i = 0; i < 10'000; ++i) {
    const Micros a{part(rng)}, b{part(rng)}, c{part(rng)};
    const auto total = e2e_latency_traditional({a, b, c});
    EXPECT_EQ(total.count(), a.count() + b.count() + c.count());
    EXPECT_EQ(total, e2e_latency_traditional({c, b, a}));
    EXPECT_EQ(total, e2e_latency_traditional({b, c, a}));
  }
}
