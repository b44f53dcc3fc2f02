#include "semcast/hash.hpp"
#include "semcast/uplink/adapters.hpp"
#include "semcast/uplink/packet.hpp"
#include "semcast/uplink/remote.hpp"
#include "semcast/uplink/sampler.hpp"
#include "semcast/uplink/telemetry.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <cstdio>
#include <random>
#include <thread>

using namespace semcast;
using namespace semcast::uplink;

namespace {

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

std::string fmt(double v, int d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", d, v);
  return buf;
}

TelemetryPacket sample_telemetry() {
  TelemetryPacket t;
  t.altitude = 45.234;
  t.latitude = 60.1867204;
  t.longitude = 24.8276511;
  t.ground_speed = 3.4199;
  t.accel = {0.121, -0.049, -9.8101};
  t.gyro = {0.00123, -0.0030, 0.0};
  t.timestamp = Micros{1'000'000};
  return t;
}

}  // namespace

// ---- frame sampling ----------------------------------------------------------

TEST(Sampler, TwoMinuteClipYieldsOneTicketPerSecond) {
  const auto tickets = sample_frames(30.0, 30, 120.0, "video-02");
  ASSERT_EQ(tickets.size(), 120u);
  EXPECT_EQ(tickets.front().frame_index, 0u);
  EXPECT_EQ(tickets.back().frame_index, 3570u);
  EXPECT_EQ(tickets.back().capture_timestamp, Micros{119'000'000});
  for (std::size_t i = 0; i < tickets.size(); ++i) {
    EXPECT_EQ(tickets[i].frame_index, 30 * i);
    EXPECT_EQ(tickets[i].source_id, "video-02");
  }
}

TEST(Sampler, TwentyFiveSecondClip) { EXPECT_EQ(sample_frames(30.0, 30, 25.0).size(), 25u); }

TEST(Sampler, PeriodOneKeepsEveryFrame) {
  const auto tickets = sample_frames(30.0, 1, 1.0);
  ASSERT_EQ(tickets.size(), 30u);
  EXPECT_EQ(tickets[29].frame_index, 29u);
}

TEST(Sampler, StartOffsetsTimestamps) {
  const auto tickets = sample_frames(30.0, 30, 2.0, "s", Micros{500});
  EXPECT_EQ(tickets[1].capture_timestamp, Micros{1'000'500});
}

TEST(Sampler, CountMatchesCeilingProperty) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> period(1, 90), secs(1, 200);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = period(rng), t = secs(rng);
    const auto tickets = sample_frames(30.0, p, t);
    const std::size_t frames = static_cast<std::size_t>(30 * t);
    EXPECT_EQ(tickets.size(), (frames + p - 1) / p) << "P=" << p << " T=" << t;
    for (std::size_t i = 1; i < tickets.size(); ++i) {
      EXPECT_LT(tickets[i - 1].capture_timestamp, tickets[i].capture_timestamp);
    }
  }
}

TEST(Sampler, RejectsBadArguments) {
  EXPECT_EQ(code_of([] { sample_frames(30.0, 0, 10.0); }), Errc::InvalidPeriod);
  EXPECT_EQ(code_of([] { sample_frames(30.0, 30, 0.0); }), Errc::ZeroDuration);
  EXPECT_EQ(code_of([] { sample_frames(0.0, 30, 10.0); }), Errc::InvalidArgument);
}

// ---- annotation packets ---------------------------------------------------------

TEST(Packet, EncodedBytesMatchesIndependentRecount) {
  const DetectionSet dets = {{"person", 0.934, {0.1234, 0.2, 0.05, 0.3}}, {"car", 0.5, {0.0, 0.0, 1.0, 1.0}}};
  const Caption cap{"two people in the \"snow\"", "inception-v3-lstm"};
  const FrameTicket frame{30, Micros{1'000'000}, "video-10"};
  const auto p = build_annotation_packet(dets, cap, sample_telemetry(), frame);

  std::string expected;
  expected += R"({"caption":{"model":"inception-v3-lstm","text":"two people in the \"snow\""},"detections":[)";
  expected += R"({"box":[)" + fmt(0.1234, 3) + "," + fmt(0.2, 3) + "," + fmt(0.05, 3) + "," + fmt(0.3, 3) +
              R"(],"conf":)" + fmt(0.934, 2) + R"(,"label":"person"},)";
  expected += R"({"box":[)" + fmt(0, 3) + "," + fmt(0, 3) + "," + fmt(1, 3) + "," + fmt(1, 3) + R"(],"conf":)" +
              fmt(0.5, 2) + R"(,"label":"car"}],)";
  expected += R"("frame":{"index":30,"source":"video-10","ts":1000000},)";
  expected += R"("telemetry":{"accel":[)" + fmt(0.121, 2) + "," + fmt(-0.049, 2) + "," + fmt(-9.8101, 2) +
              R"(],"alt":)" + fmt(45.234, 2) + R"(,"gyro":[)" + fmt(0.00123, 4) + "," + fmt(-0.003, 4) + "," +
              fmt(0, 4) + R"(],"lat":)" + fmt(60.1867204, 6) + R"(,"lon":)" + fmt(24.8276511, 6) +
              R"(,"speed":)" + fmt(3.4199, 2) + R"(,"ts":1000000}})";

  EXPECT_EQ(encode_packet(p), expected);
  EXPECT_EQ(p.encoded_bytes, expected.size());
}

TEST(Packet, RoundTripIsExact) {
  const auto p = build_annotation_packet({{"bird", 0.77, {0.3, 0.3, 0.1, 0.1}}}, {"ducks on a lake", "m"},
                                         sample_telemetry(), {60, Micros{2'000'000}, "video-06"});
  const auto q = decode_packet(encode_packet(p));
  EXPECT_EQ(q, p);
}

TEST(Packet, CanonicalHashIsStableAcrossRebuilds) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    DetectionSet dets;
    for (int i = 0; i < trial % 7; ++i) dets.push_back({"obj" + std::to_string(i), u(rng) * 2, {u(rng), u(rng), u(rng), u(rng)}});
    auto t = sample_telemetry();
    t.altitude = u(rng) * 300;
    t.timestamp = Micros{trial};
    const auto a = build_annotation_packet(dets, {"c", "m"}, t, {static_cast<std::uint64_t>(trial), Micros{trial}, "s"});
    const auto b = decode_packet(encode_packet(a));
    EXPECT_EQ(sha256_hex(encode_packet(a)), sha256_hex(encode_packet(b)));
    EXPECT_EQ(encode_packet(b), encode_packet(build_annotation_packet(b.detections, b.caption, b.telemetry, b.frame)));
  }
}

TEST(Packet, RejectsInvalidContent) {
  const FrameTicket f{0, Micros{0}, "s"};
  EXPECT_EQ(code_of([&] { build_annotation_packet({{"x", 1.2, {0, 0, 0.1, 0.1}}}, {"c", "m"}, sample_telemetry(), f); }),
            Errc::OutOfRange);
  EXPECT_EQ(code_of([&] { build_annotation_packet({{"x", 0.5, {0.95, 0, 0.1, 0.1}}}, {"c", "m"}, sample_telemetry(), f); }),
            Errc::OutOfRange);
  EXPECT_EQ(code_of([&] { build_annotation_packet({}, {"", "m"}, sample_telemetry(), f); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { decode_packet("{\"caption\":1}"); }), Errc::ParseFailure);
  EXPECT_EQ(code_of([] { decode_packet("not json"); }), Errc::ParseFailure);
}

TEST(Packet, EmptyDetectionsAreAllowed) {
  const auto p = build_annotation_packet({}, {"an empty field", "m"}, sample_telemetry(), {0, Micros{0}, "s"});
  EXPECT_NE(encode_packet(p).find(R"("detections":[])"), std::string::npos);
}

// ---- telemetry -----------------------------------------------------------------

TEST(Telemetry, StationarySampleNormalizesUnits) {
  RawSensorSample raw;
  raw.lat_e7 = 601867204;
  raw.lon_e7 = 248276511;
  raw.alt_mm = 45'230;
  raw.accel_mg = {0, 0, -1000};
  raw.gyro_mrads = {1, -2, 0};
  raw.time_boot_us = 5'000'000;
  const auto t = encode_telemetry(raw, Micros{100});
  EXPECT_DOUBLE_EQ(t.latitude, 60.186720);
  EXPECT_DOUBLE_EQ(t.longitude, 24.827651);
  EXPECT_DOUBLE_EQ(t.altitude, 45.23);
  EXPECT_EQ(t.ground_speed, 0.0);
  EXPECT_DOUBLE_EQ(t.accel[2], -9.81);
  EXPECT_DOUBLE_EQ(t.gyro[1], -0.002);
  EXPECT_EQ(t.timestamp, Micros{5'000'100});
}

TEST(Telemetry, GroundSpeedIsHorizontalMagnitude) {
  RawSensorSample raw;
  raw.vx_cms = 300;
  raw.vy_cms = 400;
  raw.vz_cms = -900;
  EXPECT_DOUBLE_EQ(encode_telemetry(raw).ground_speed, 5.0);
}

TEST(Telemetry, RejectsOutOfRangeValues) {
  RawSensorSample raw;
  raw.lat_e7 = 910000000;
  EXPECT_EQ(code_of([&] { encode_telemetry(raw); }), Errc::OutOfRange);
  raw.lat_e7 = 0;
  raw.alt_mm = -500'000;
  EXPECT_EQ(code_of([&] { encode_telemetry(raw); }), Errc::OutOfRange);
  EXPECT_NO_THROW(encode_telemetry(raw, Micros{0}, -1000.0));
}

TEST(Telemetry, JsonRoundTrip) {
  const auto t = quantized(sample_telemetry());
  const auto text = encode_telemetry_json(t);
  EXPECT_EQ(telemetry_from_json(nlohmann::json::parse(text)), t);
  EXPECT_EQ(encode_telemetry_json(telemetry_from_json(nlohmann::json::parse(text))), text);
}

TEST(Telemetry, EncoderEnforcesMonotoneTimestampsPerSource) {
  TelemetryEncoder enc(Micros{10});
  RawSensorSample raw;
  raw.time_boot_us = 100;
  EXPECT_EQ(enc.encode("a", raw).timestamp, Micros{110});
  EXPECT_NO_THROW(enc.encode("b", raw));
  EXPECT_EQ(code_of([&] { enc.encode("a", raw); }), Errc::TimestampRegression);
  raw.time_boot_us = 101;
  EXPECT_NO_THROW(enc.encode("a", raw));
  EXPECT_EQ(code_of([&] { enc.admit("a", Micros{50}); }), Errc::TimestampRegression);
  enc.set_offset(Micros{1000});
  raw.time_boot_us = 0;
  EXPECT_EQ(enc.encode("a", raw).timestamp, Micros{1000});
}

// ---- adapters -------------------------------------------------------------------

TEST(Adapters, ReplayServesTraceAndMissesLoudly) {
  auto trace = std::make_shared<AnnotationTrace>();
  TraceEntry e;
  e.frame_index = 30;
  e.detections = {{"person", 0.9, {0.1, 0.1, 0.2, 0.2}}};
  e.caption = "a person";
  trace->add(e);
  ReplayAdapter replay(trace);
  const FrameTicket hit{30, Micros{0}, "s"};
  EXPECT_EQ(detect_objects(hit, replay), e.detections);
  EXPECT_EQ(caption_frame(hit, replay).text, "a person");
  EXPECT_EQ(code_of([&] { replay.detect({31, Micros{0}, "s"}); }), Errc::TraceMiss);
}

TEST(Adapters, ConstantAdapterAndEmptyCaption) {
  ConstantAdapter c({}, {"", "m"});
  EXPECT_TRUE(detect_objects({0, Micros{0}, "s"}, c).empty());
  EXPECT_EQ(code_of([&] { caption_frame({0, Micros{0}, "s"}, c); }), Errc::AdapterUnavailable);
  ConstantAdapter bad({{"x", 2.0, {0, 0, 0, 0}}}, {"c", "m"});
  EXPECT_EQ(code_of([&] { detect_objects({0, Micros{0}, "s"}, bad); }), Errc::OutOfRange);
}

TEST(Adapters, BundledTracesCoverEverySampledFrame) {
  for (int v = 1; v <= 10; ++v) {
    char name[32];
    std::snprintf(name, sizeof name, "video_%02d.jsonl", v);
    const auto trace = AnnotationTrace::load(std::filesystem::path(SEMCAST_DATA_DIR) / "traces" / name);
    ASSERT_GT(trace.size(), 0u);
    std::uint64_t expected = 0;
    Micros last{-1};
    for (const auto& [index, entry] : trace.entries()) {
      EXPECT_EQ(index, expected);
      expected += kDefaultSamplingPeriod;
      EXPECT_NO_THROW(check_detections(entry.detections));
      EXPECT_NO_THROW(check_telemetry(entry.telemetry));
      EXPECT_GT(entry.telemetry.timestamp, last);
      last = entry.telemetry.timestamp;
      EXPECT_LE(entry.telemetry.ground_speed, 5.0);
    }
  }
}

TEST(Adapters, TraceLoadErrors) {
  EXPECT_EQ(code_of([] { AnnotationTrace::load("/nonexistent/trace.jsonl"); }), Errc::DatasetMissing);
  const auto path = std::filesystem::temp_directory_path() / "semcast_bad_trace.jsonl";
  std::ofstream(path) << "{\"frame_index\": 0}\n";
  EXPECT_EQ(code_of([&] { AnnotationTrace::load(path); }), Errc::ParseFailure);
  std::filesystem::remove(path);
}

// ---- remote adapters --------------------------------------------------------------

namespace {

struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port) + path; }
  ~TestServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

}  // namespace

TEST(RemoteAdapters, DetectorAndCaptionerOverHttp) {
  TestServer s;
  s.server.Post("/detect", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json out = {{"detections", nlohmann::json::array()}};
    out["detections"].push_back(nlohmann::json::object({{"label", "person"}, {"conf", 0.9}, {"box", {0.1, 0.1, 0.2, 0.2}}}));
    out["detections"].push_back(nlohmann::json::object(
        {{"label", body.at("source").get<std::string>()}, {"conf", 0.5}, {"box", {0.0, 0.0, 0.5, 0.5}}}));
    res.set_content(out.dump(), "application/json");
  });
  s.server.Post("/caption", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    res.set_content(nlohmann::json{{"caption", "frame " + std::to_string(body.at("frame_index").get<int>())},
                                   {"model", "lstm"}}
                        .dump(),
                    "application/json");
  });
  s.start();

  RemoteDetectionAdapter det(s.url("/detect"));
  RemoteCaptionAdapter cap(s.url("/caption"));
  const FrameTicket frame{90, Micros{3'000'000}, "video-01"};
  const auto d = detect_objects(frame, det);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[1].label, "video-01");
  const auto c = caption_frame(frame, cap);
  EXPECT_EQ(c.text, "frame 90");
  EXPECT_EQ(c.model_id, "lstm");
}

TEST(RemoteAdapters, FailuresMapToAdapterUnavailable) {
  TestServer s;
  s.server.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content("{\"detections\":[]}", "application/json");
  });
  s.server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  s.server.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"nope\":1}", "application/json");
  });
  s.start();

  const FrameTicket frame{0, Micros{0}, "s"};
  RemoteDetectionAdapter slow(s.url("/slow"), std::chrono::milliseconds(150));
  EXPECT_EQ(code_of([&] { slow.detect(frame); }), Errc::AdapterUnavailable);
  RemoteDetectionAdapter broken(s.url("/broken"));
  EXPECT_EQ(code_of([&] { broken.detect(frame); }), Errc::AdapterUnavailable);
  RemoteCaptionAdapter garbage(s.url("/garbage"));
  EXPECT_EQ(code_of([&] { garbage.caption(frame); }), Errc::AdapterUnavailable);
  RemoteCaptionAdapter refused("http://127.0.0.1:1/caption", std::chrono::milliseconds(200));
  EXPECT_EQ(code_of([&] { refused.caption(frame); }), Errc::AdapterUnavailable);
}
