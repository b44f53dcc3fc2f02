#include "semcast/transport/annotations_http.hpp"
#include "semcast/transport/broker.hpp"
#include "semcast/transport/metering.hpp"
#include "semcast/transport/mini_broker.hpp"
#include "semcast/transport/mqtt_client.hpp"
#include "semcast/transport/mqtt_codec.hpp"
#include "semcast/transport/timing.hpp"
#include "semcast/transport/topics.hpp"

#include <gtest/gtest.h>

#include <random>
#include <thread>

using namespace semcast;
using namespace semcast::transport;
using namespace std::chrono_literals;

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

/// Exchange with legs of `up`/`down` µs against a remote clock `offset` ahead.
TimesyncSample exchange(std::int64_t t1, std::int64_t up, std::int64_t hold, std::int64_t down, std::int64_t offset) {
  return {Micros{t1}, Micros{t1 + up + offset}, Micros{t1 + up + hold + offset}, Micros{t1 + up + hold + down}};
}

std::string bytes(std::initializer_list<int> b) {
  std::string s;
  for (int v : b) s.push_back(static_cast<char>(v));
  return s;
}

}  // namespace

// ---- clock sync and latency ---------------------------------------------------------

TEST(ClockSync, AlignedSymmetricIsZero) {
  const auto o = sync_clocks({exchange(0, 10'000, 500, 10'000, 0)});
  EXPECT_EQ(o.offset_ms, 0.0);
  EXPECT_EQ(o.dispersion_ms, 0.0);
  EXPECT_EQ(o.sample_count, 1u);
}

TEST(ClockSync, RemoteAheadByFiveMs) {
  const auto o = sync_clocks({exchange(1'000, 10'000, 200, 10'000, 5'000), exchange(90'000, 3'000, 0, 3'000, 5'000)});
  EXPECT_EQ(o.offset_ms, 5.0);
  EXPECT_EQ(o.offset(), Micros{5'000});
  EXPECT_EQ(o.to_remote(Micros{100}), Micros{5'100});
}

TEST(ClockSync, DispersionIsPopulationStddev) {
  // offsets 4 ms and 6 ms
  const auto o = sync_clocks({exchange(0, 2'000, 0, 2'000, 4'000), exchange(0, 2'000, 0, 2'000, 6'000)});
  EXPECT_DOUBLE_EQ(o.offset_ms, 5.0);
  EXPECT_DOUBLE_EQ(o.dispersion_ms, 1.0);
}

TEST(ClockSync, Errors) {
  EXPECT_EQ(code_of([] { sync_clocks({}); }), Errc::NoSamples);
  EXPECT_EQ(code_of([] { sync_clocks({{Micros{10}, Micros{0}, Micros{5}, Micros{5}}}); }), Errc::NonMonotoneSample);
  EXPECT_EQ(code_of([] { sync_clocks({{Micros{0}, Micros{9}, Micros{5}, Micros{20}}}); }), Errc::NonMonotoneSample);
}

TEST(ClockSync, SymmetricLegsRecoverOffsetProperty) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::int64_t> leg(0, 200'000), offset(-5'000'000, 5'000'000), hold(0, 10'000);
  for (int i = 0; i < 10'000; ++i) {
    const auto l = leg(rng), off = offset(rng);
    const auto o = sync_clocks({exchange(1'000'000, l, hold(rng), l, off)});
    EXPECT_LE(std::abs(o.offset_ms * 1000.0 - static_cast<double>(off)), 1.0);
  }
}

TEST(OneWayLatency, HalvesRoundTrip) {
  EXPECT_EQ(one_way_latency(Millis{0}).count(), 0.0);
  EXPECT_EQ(one_way_latency(Millis{96}).count(), 48.0);
  EXPECT_EQ(one_way_latency(Millis{4}).count(), 2.0);
  EXPECT_EQ(code_of([] { one_way_latency(Millis{-1}); }), Errc::NegativeRtt);
}

TEST(OneWayLatency, DoublingThenHalvingIsExact) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> x(0.0, 1e7);
  for (int i = 0; i < 10'000; ++i) {
    const double v = x(rng);
    EXPECT_EQ(one_way_latency(Millis{2.0 * v}).count(), v);
  }
}

// ---- metering -------------------------------------------------------------------------

TEST(Metering, OneReceiptOverOneSecond) {
  const auto s = meter_bandwidth({{"t", 125, Micros{0}, Micros{0}, Direction::Uplink}}, Direction::Uplink, Micros{0},
                                 Micros{1'000'000});
  EXPECT_EQ(s.mean_bps, 1000.0);
  EXPECT_EQ(s.max_bps, 1000.0);
  EXPECT_EQ(s.byte_total, 125u);
}

TEST(Metering, DirectionsAreSeparated) {
  std::vector<ChannelReceipt> r = {{"a", 100, Micros{0}, Micros{0}, Direction::Uplink},
                                   {"b", 900, Micros{0}, Micros{0}, Direction::Downlink}};
  EXPECT_EQ(meter_bandwidth(r, Direction::Uplink, Micros{0}, Micros{1'000'000}).byte_total, 100u);
  EXPECT_EQ(meter_bandwidth(r, Direction::Downlink, Micros{0}, Micros{1'000'000}).byte_total, 900u);
  EXPECT_EQ(code_of([&] { meter_bandwidth(r, Direction::Control, Micros{0}, Micros{1'000'000}); }), Errc::EmptyWindow);
  EXPECT_EQ(code_of([&] { meter_bandwidth(r, Direction::Uplink, Micros{5'000'000}, Micros{1'000'000}); }),
            Errc::EmptyWindow);
}

TEST(Metering, ByteTotalMatchesIndependentRecountProperty) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> count(1, 400), size(1, 5000), dir(0, 2);
  std::uniform_int_distribution<std::int64_t> when(0, 30'000'000);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ChannelReceipt> receipts;
    std::uint64_t up_bytes = 0;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      ChannelReceipt r{"x", static_cast<std::size_t>(size(rng)), Micros{when(rng)}, Micros{0},
                       static_cast<Direction>(dir(rng))};
      r.t_recv = r.t_send;
      if (r.direction == Direction::Uplink) up_bytes += r.payload_bytes;
      receipts.push_back(r);
    }
    if (up_bytes == 0) continue;
    const auto s = meter_bandwidth(receipts, Direction::Uplink, Micros{0}, Micros{30'000'001});
    EXPECT_EQ(s.byte_total, up_bytes);
    EXPECT_NEAR(s.mean_bps * s.window_s, static_cast<double>(up_bytes) * 8.0, 1e-6 * up_bytes);
    EXPECT_GE(s.max_bps, s.mean_bps);
  }
}

TEST(Metering, MaxIsBusiestSecondAndStddevOverBins) {
  std::vector<ChannelReceipt> r = {{"a", 100, Micros{0}, Micros{0}, Direction::Uplink},
                                   {"a", 300, Micros{1'500'000}, Micros{0}, Direction::Uplink}};
  const auto s = meter_bandwidth(r, Direction::Uplink, Micros{0}, Micros{2'000'000});
  EXPECT_EQ(s.max_bps, 2400.0);
  EXPECT_EQ(s.mean_bps, 1600.0);
  EXPECT_EQ(s.stddev_bps, 800.0);
}

TEST(Metering, AutoWindowCoversWholeSeconds) {
  std::vector<ChannelReceipt> r = {{"a", 10, Micros{5'000'000}, Micros{0}, Direction::Downlink},
                                   {"a", 10, Micros{7'000'000}, Micros{0}, Direction::Downlink}};
  const auto s = meter_bandwidth(r, Direction::Downlink);
  EXPECT_EQ(s.window_s, 3.0);
  EXPECT_EQ(s.byte_total, 20u);
}

// ---- topics ------------------------------------------------------------------------

TEST(Topics, NamesQosAndDirections) {
  EXPECT_EQ(topic("uav-1", Stream::Code), "semcast/uav-1/code");
  EXPECT_EQ(topic("uav-1", Stream::Mulse), "semcast/uav-1/mulse");
  EXPECT_EQ(topic("uav-1", Stream::Telemetry), "semcast/uav-1/telemetry");
  EXPECT_EQ(topic("uav-1", Stream::Cmd), "semcast/uav-1/cmd");
  EXPECT_EQ(default_qos(Stream::Code), 1);
  EXPECT_EQ(default_qos(Stream::Mulse), 1);
  EXPECT_EQ(default_qos(Stream::Telemetry), 0);
  EXPECT_EQ(direction_of_topic("semcast/x/code"), Direction::Downlink);
  EXPECT_EQ(direction_of_topic("semcast/x/telemetry"), Direction::Uplink);
}

TEST(Topics, WildcardMatching) {
  EXPECT_TRUE(topic_matches("semcast/+/code", "semcast/uav-1/code"));
  EXPECT_FALSE(topic_matches("semcast/+/code", "semcast/uav-1/mulse"));
  EXPECT_TRUE(topic_matches("semcast/#", "semcast/uav-1/code"));
  EXPECT_TRUE(topic_matches("semcast/#", "semcast"));
  EXPECT_TRUE(topic_matches("#", "a/b"));
  EXPECT_FALSE(topic_matches("semcast/uav-1", "semcast/uav-1/code"));
  EXPECT_FALSE(topic_matches("semcast/uav-1/code", "semcast/uav-1"));
  EXPECT_TRUE(topic_matches("a/b", "a/b"));
}

// ---- loopback broker ----------------------------------------------------------------

TEST(LoopbackBroker, ReceiptForSmallPublish) {
  ManualClock clock(Micros{1'000});
  LoopbackBroker broker(clock);
  broker.set_link_delay("semcast/+/code", Micros{2'000});
  auto sub = broker.subscribe("semcast/+/code");
  const auto r = broker.publish("semcast/a/code", std::string(100, 'x'), 1);
  EXPECT_EQ(r.payload_bytes, 100u);
  EXPECT_EQ(r.t_send, Micros{1'000});
  EXPECT_EQ(r.t_recv, Micros{3'000});
  EXPECT_EQ(r.direction, Direction::Downlink);
  const auto m = sub->try_pop();
  ASSERT_TRUE(m);
  EXPECT_EQ(m->t_recv, Micros{3'000});
}

TEST(LoopbackBroker, DownAndOversize) {
  ManualClock clock;
  LoopbackBroker broker(clock, 64);
  EXPECT_EQ(code_of([&] { broker.publish("t", std::string(65, 'x'), 0); }), Errc::PayloadTooLarge);
  broker.set_available(false);
  EXPECT_EQ(code_of([&] { broker.publish("t", "x", 0); }), Errc::BrokerUnavailable);
  EXPECT_EQ(code_of([&] { broker.subscribe("t"); }), Errc::BrokerUnavailable);
}

TEST(LoopbackBroker, ThousandPublishesArriveInOrder) {
  SteadyClock clock;
  LoopbackBroker broker(clock);
  auto sub = broker.subscribe("semcast/s/code");
  for (int i = 0; i < 1000; ++i) {
    const auto r = broker.publish("semcast/s/code", std::to_string(i), 1);
    EXPECT_GE(r.t_recv, r.t_send);
  }
  for (int i = 0; i < 1000; ++i) {
    const auto m = sub->try_pop();
    ASSERT_TRUE(m);
    EXPECT_EQ(m->payload, std::to_string(i));
  }
  EXPECT_FALSE(sub->try_pop());
}

TEST(LoopbackBroker, ConcurrentPublishersKeepPerPublisherOrder) {
  SteadyClock clock;
  LoopbackBroker broker(clock);
  auto sub = broker.subscribe("semcast/+/code");
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 250; ++i) broker.publish("semcast/p" + std::to_string(t) + "/code", std::to_string(i), 1);
    });
  }
  for (auto& th : threads) th.join();
  std::map<std::string, int> next;
  std::uint64_t last_seq = 0;
  bool first = true;
  while (auto m = sub->try_pop()) {
    EXPECT_EQ(std::stoi(m->payload), next[m->topic]++);
    if (!first) {
      EXPECT_GT(m->sequence, last_seq);
    }
    last_seq = m->sequence;
    first = false;
  }
  for (const auto& [t, n] : next) EXPECT_EQ(n, 250) << t;
}

// ---- MQTT codec ----------------------------------------------------------------------

TEST(MqttCodec, ConnectMatchesHandAssembledBytes) {
  EXPECT_EQ(mqtt::encode_connect("a", 30),
            bytes({0x10, 0x0D, 0x00, 0x04, 'M', 'Q', 'T', 'T', 0x04, 0x02, 0x00, 0x1E, 0x00, 0x01, 'a'}));
  EXPECT_EQ(mqtt::encode_publish("t/x", "hi", 1, 7), bytes({0x32, 0x09, 0x00, 0x03, 't', '/', 'x', 0x00, 0x07, 'h', 'i'}));
  EXPECT_EQ(mqtt::encode_publish("t", "z", 0), bytes({0x30, 0x04, 0x00, 0x01, 't', 'z'}));
  EXPECT_EQ(mqtt::encode_subscribe(1, "a/#", 1), bytes({0x82, 0x08, 0x00, 0x01, 0x00, 0x03, 'a', '/', '#', 0x01}));
  EXPECT_EQ(mqtt::encode_puback(258), bytes({0x40, 0x02, 0x01, 0x02}));
  EXPECT_EQ(mqtt::encode_pingreq(), bytes({0xC0, 0x00}));
  EXPECT_EQ(mqtt::encode_disconnect(), bytes({0xE0, 0x00}));
}

TEST(MqttCodec, RemainingLengthBoundaries) {
  const std::vector<std::pair<std::size_t, std::string>> cases = {
      {0, bytes({0x00})},
      {127, bytes({0x7F})},
      {128, bytes({0x80, 0x01})},
      {16'383, bytes({0xFF, 0x7F})},
      {16'384, bytes({0x80, 0x80, 0x01})},
      {2'097'151, bytes({0xFF, 0xFF, 0x7F})},
      {2'097'152, bytes({0x80, 0x80, 0x80, 0x01})},
      {268'435'455, bytes({0xFF, 0xFF, 0xFF, 0x7F})},
  };
  for (const auto& [n, encoded] : cases) {
    std::string out;
    mqtt::put_remaining_length(out, n);
    EXPECT_EQ(out, encoded) << n;
  }
  std::string out;
  EXPECT_EQ(code_of([&] { mqtt::put_remaining_length(out, 268'435'456); }), Errc::PayloadTooLarge);
}

TEST(MqttCodec, ReaderReassemblesSplitStream) {
  const std::string payload(300, 'p');
  const std::string stream = mqtt::encode_publish("semcast/a/code", payload, 1, 9) + mqtt::encode_pingresp();
  mqtt::PacketReader reader;
  std::vector<mqtt::Packet> got;
  for (char c : stream) {
    reader.feed({&c, 1});
    while (auto p = reader.next()) got.push_back(*p);
  }
  ASSERT_EQ(got.size(), 2u);
  const auto pub = mqtt::parse_publish(got[0]);
  EXPECT_EQ(pub.topic, "semcast/a/code");
  EXPECT_EQ(pub.payload, payload);
  EXPECT_EQ(pub.qos, 1);
  EXPECT_EQ(pub.packet_id, 9);
  EXPECT_EQ(got[1].type, mqtt::kPingresp);
  EXPECT_EQ(reader.buffered(), 0u);
}

TEST(MqttCodec, RejectsOverlongLengthAndTruncatedBodies) {
  mqtt::PacketReader reader;
  reader.feed(bytes({0x30, 0xFF, 0xFF, 0xFF, 0xFF, 0x01}));
  EXPECT_EQ(code_of([&] { reader.next(); }), Errc::ProtocolError);
  mqtt::Packet p{mqtt::kPublish, 0, bytes({0x00, 0x09, 'a'})};
  EXPECT_EQ(code_of([&] { mqtt::parse_publish(p); }), Errc::ProtocolError);
}

// ---- MQTT client against the embedded broker ------------------------------------------

TEST(MqttClient, PublishSubscribeInOrder) {
  MiniBroker broker;
  MqttOptions opts;
  opts.port = broker.port();
  opts.client_id = "sub";
  MqttClient subscriber(opts);
  auto sub = subscriber.subscribe("semcast/+/code");
  opts.client_id = "pub";
  MqttClient publisher(opts);

  for (int i = 0; i < 1000; ++i) {
    const auto r = publisher.publish("semcast/uav-1/code", "scene-" + std::to_string(i), 1);
    EXPECT_GE(r.t_recv, r.t_send);
    EXPECT_EQ(r.direction, Direction::Downlink);
  }
  for (int i = 0; i < 1000; ++i) {
    const auto m = sub->pop(2s);
    ASSERT_TRUE(m) << "missing message " << i;
    EXPECT_EQ(m->payload, "scene-" + std::to_string(i));
  }
}

TEST(MqttClient, QosZeroTelemetryAndLargePayload) {
  MiniBroker broker;
  MqttOptions opts;
  opts.port = broker.port();
  MqttClient client(opts);
  auto sub = client.subscribe("semcast/#");
  const auto r = client.publish("semcast/uav-1/telemetry", "{\"alt\":1}", 0);
  EXPECT_EQ(r.t_recv, r.t_send);
  EXPECT_EQ(r.direction, Direction::Uplink);
  const std::string big(200'000, 'b');
  client.publish("semcast/uav-1/code", big, 1);
  auto m1 = sub->pop(2s);
  auto m2 = sub->pop(2s);
  ASSERT_TRUE(m1 && m2);
  EXPECT_EQ(m1->payload, "{\"alt\":1}");
  EXPECT_EQ(m2->payload.size(), big.size());
}

TEST(MqttClient, UnreachableBrokerIsUnavailable) {
  int port = 0;
  { auto probe = listen_tcp(0, port); }
  MqttOptions opts;
  opts.port = port;
  opts.timeout = 300ms;
  EXPECT_EQ(code_of([&] { MqttClient c(opts); }), Errc::BrokerUnavailable);
}

TEST(MqttClient, BrokerShutdownSurfacesAsUnavailable) {
  auto broker = std::make_unique<MiniBroker>();
  MqttOptions opts;
  opts.port = broker->port();
  opts.timeout = 300ms;
  MqttClient client(opts);
  client.publish("semcast/a/code", "x", 1);
  broker->stop();
  std::this_thread::sleep_for(50ms);
  EXPECT_EQ(code_of([&] {
              for (int i = 0; i < 5; ++i) client.publish("semcast/a/code", "x", 1);
            }),
            Errc::BrokerUnavailable);
}

// ---- annotation endpoint ----------------------------------------------------------------

TEST(AnnotationsHttp, PostDeliversPacketAndReceipt) {
  httplib::Server server;
  std::vector<uplink::AnnotationPacket> received;
  std::mutex m;
  mount_annotation_route(server, [&](const uplink::AnnotationPacket& p) {
    std::lock_guard lock(m);
    received.push_back(p);
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  uplink::TelemetryPacket t;
  t.altitude = 40;
  t.timestamp = Micros{5};
  const auto packet = uplink::build_annotation_packet({{"person", 0.9, {0.1, 0.1, 0.2, 0.2}}}, {"a person", "m"}, t,
                                                      {30, Micros{1'000'000}, "video-01"});
  SteadyClock clock;
  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  const auto r = post_annotation(base, packet, clock);
  EXPECT_EQ(r.payload_bytes, packet.encoded_bytes);
  EXPECT_EQ(r.route, "/v1/annotations");
  EXPECT_EQ(r.direction, Direction::Uplink);
  EXPECT_GE(r.t_recv, r.t_send);
  {
    std::lock_guard lock(m);
    ASSERT_EQ(received.size(), 1u);
    EXPECT_EQ(received[0], packet);
  }

  httplib::Client client(base);
  auto bad = client.Post("/v1/annotations", "{\"nope\":true}", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto huge = client.Post("/v1/annotations", std::string(kMaxAnnotationBytes + 1, ' '), "application/json");
  ASSERT_TRUE(huge);
  EXPECT_EQ(huge->status, 413);

  server.stop();
  th.join();
  EXPECT_EQ(code_of([&] { post_annotation(base, packet, clock, 300ms); }), Errc::BrokerUnavailable);
}
