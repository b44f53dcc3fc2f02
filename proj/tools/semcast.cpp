// semcast: experiment runner and live gateway.

#include "semcast/gateway/app.hpp"
#include "semcast/gateway/metrics_http.hpp"
#include "semcast/transport/annotations_http.hpp"
#include "semcast/transport/mini_broker.hpp"
#include "semcast/transport/mqtt_client.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <iostream>
#include <limits>
#include <thread>

namespace fs = std::filesystem;
using namespace semcast;
using namespace semcast::gateway;

namespace {

struct Common {
  std::string config_path;
  std::string data;
  std::string fixtures;
  std::string mode;
  std::vector<int> videos;
  std::uint32_t sampling_period = 0;
  int retries = 0;
  std::string stream_id;
};

void add_common(CLI::App& cmd, Common& c) {
  cmd.add_option("-c,--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd.add_option("--data", c.data, "dataset directory");
  cmd.add_option("--fixtures", c.fixtures, "mock backend fixtures directory");
  cmd.add_option("--mode", c.mode, "backend mode")->check(CLI::IsMember({"mock", "remote"}));
  cmd.add_option("--video", c.videos, "benchmark video id (repeatable)");
  cmd.add_option("--sampling-period", c.sampling_period, "frames between samples");
  cmd.add_option("--retries", c.retries, "code generation attempts");
  cmd.add_option("--stream", c.stream_id, "stream id");
}

/// Config file first, then flags. Relative paths in a config file resolve
/// against its directory; flag paths resolve against the working directory.
std::pair<RunConfig, fs::path> resolve_config(const Common& c) {
  RunConfig cfg;
  fs::path base = fs::current_path();
  if (!c.config_path.empty()) {
    cfg = load_config(c.config_path);
    base = fs::absolute(c.config_path).parent_path();
  }
  if (!c.data.empty()) cfg.dataset = fs::absolute(c.data).string();
  if (!c.fixtures.empty()) cfg.fixtures = fs::absolute(c.fixtures).string();
  if (!c.mode.empty()) cfg.mode = c.mode == "mock" ? BackendMode::Mock : BackendMode::Remote;
  if (!c.videos.empty()) cfg.videos = c.videos;
  if (c.sampling_period > 0) cfg.sampling_period = c.sampling_period;
  if (c.retries > 0) cfg.retries = c.retries;
  if (!c.stream_id.empty()) cfg.stream_id = c.stream_id;
  // Re-validate after overrides.
  cfg = parse_config_text(serialize_config(cfg));
  return {cfg, base};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(Errc::StorageFailure, "cannot write " + path.string());
}

int finish(const bench::ExperimentReport& report) {
  if (report.partial) {
    std::cerr << "partial run: " << report.aggregate.videos << " of " << report.videos.size() << " videos completed\n";
    return kExitPartial;
  }
  return kExitOk;
}

// ---- run -------------------------------------------------------------------------------

struct RunArgs {
  Common common;
  std::string out_dir = ".";
  std::string dt_log;
};

int cmd_run(const RunArgs& a) {
  auto [cfg, base] = resolve_config(a.common);
  BackendSet set(cfg, base);
  auto backends = set.backends();
  std::unique_ptr<DTStore> dt;
  if (!a.dt_log.empty()) {
    dt = std::make_unique<DTStore>(a.dt_log);
    backends.on_scene = [&](const bench::PublishedScene& s) { dt->store_scene(dt_entry_from(s)); };
  }
  const auto report = bench::run_comparison(comparison_options(cfg, base), backends);
  fs::create_directories(a.out_dir);
  write_file(fs::path(a.out_dir) / "report.json", bench::report_json(report));
  write_file(fs::path(a.out_dir) / "report.md", bench::report_markdown(report));
  std::cout << bench::report_hash(report) << "\n";
  return finish(report);
}

// ---- stream ----------------------------------------------------------------------------

struct StreamArgs {
  Common common;
  std::string broker_host;
  int broker_port = -1;
  bool embedded_broker = false;
  int http_port = -1;
  double hold_s = 0.0;
  std::string dt_log;
  std::string out_dir;
};

int cmd_stream(const StreamArgs& a) {
  auto [cfg, base] = resolve_config(a.common);
  if (!a.broker_host.empty()) cfg.broker_host = a.broker_host;
  if (a.broker_port >= 0) cfg.broker_port = a.broker_port;
  if (a.http_port >= 0) cfg.http_port = a.http_port;
  if (!a.dt_log.empty()) cfg.dt_log = a.dt_log;

  std::unique_ptr<transport::MiniBroker> embedded;
  if (a.embedded_broker) {
    embedded = std::make_unique<transport::MiniBroker>(cfg.broker_port);
    cfg.broker_host = "127.0.0.1";
    cfg.broker_port = embedded->port();
    std::cout << "broker mqtt://127.0.0.1:" << cfg.broker_port << "\n";
  }
  transport::MqttOptions mo;
  mo.host = cfg.broker_host;
  mo.port = cfg.broker_port;
  mo.client_id = "semcast-gateway-" + cfg.stream_id;
  transport::MqttClient client(mo);

  MetricsBoard board(cfg.stream_id);
  DTStore dt(resolve(base, cfg.dt_log));

  std::atomic<std::size_t> annotations{0};
  httplib::Server http;
  mount_metrics_route(http, board);
  transport::mount_annotation_route(http, [&](const uplink::AnnotationPacket& p) {
    ++annotations;
    client.publish(transport::topic(cfg.stream_id, transport::Stream::Telemetry),
                   uplink::encode_telemetry_json(p.telemetry), transport::default_qos(transport::Stream::Telemetry));
  });
  const int http_port = cfg.http_port == 0 ? http.bind_to_any_port("127.0.0.1") : cfg.http_port;
  if (cfg.http_port != 0 && !http.bind_to_port("127.0.0.1", http_port)) {
    throw Error(Errc::ConfigError, "cannot bind HTTP port " + std::to_string(http_port));
  }
  if (http_port < 0) throw Error(Errc::ConfigError, "cannot bind an HTTP port");
  std::thread http_thread([&] { http.listen_after_bind(); });
  std::cout << "metrics http://127.0.0.1:" << http_port << transport::kMetricsPath << "\n" << std::flush;

  // Viewer render reports and actuator frames feed the board.
  auto reports = client.subscribe(transport::topic(cfg.stream_id, transport::Stream::Metrics));
  auto frames = client.subscribe(transport::topic(cfg.stream_id, transport::Stream::Mulse));
  std::atomic<bool> listening{true};
  std::thread listener([&] {
    while (listening) {
      if (auto m = reports->pop(std::chrono::milliseconds(20))) board.ingest_report(m->payload);
      while (auto f = frames->try_pop()) {
        try {
          board.set_mulsemedia(mulse::decode_frame(f->payload));
        } catch (const Error&) {
        }
      }
    }
  });

  int code = kExitOk;
  try {
    BackendSet set(cfg, base);
    auto backends = set.backends();
    backends.mirror = &client;
    backends.on_scene = [&](const bench::PublishedScene& s) {
      dt.store_scene(dt_entry_from(s));
      board.record_scene(s.timestamp);
      board.publish(client);
    };
    const auto report = bench::run_comparison(comparison_options(cfg, base), backends);
    const auto& agg = report.aggregate;
    transport::BitrateStats up, down;
    up.mean_bps = agg.semantic_uplink_bps.mean;
    down.mean_bps = agg.semantic_downlink_bps.mean;
    board.set_bitrates(up, down);
    board.set_latency(agg.semantic_latency, agg.traditional_latency);
    board.publish(client);
    if (!a.out_dir.empty()) {
      fs::create_directories(a.out_dir);
      write_file(fs::path(a.out_dir) / "report.json", bench::report_json(report));
    }
    std::cout << "scenes " << dt.size() << " dt-head " << dt.head_hash() << "\n";
    std::cout << bench::report_hash(report) << "\n" << std::flush;
    code = finish(report);
    if (a.hold_s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(a.hold_s));
  } catch (...) {
    listening = false;
    listener.join();
    http.stop();
    http_thread.join();
    throw;
  }
  listening = false;
  listener.join();
  http.stop();
  http_thread.join();
  return code;
}

// ---- baseline --------------------------------------------------------------------------

struct BaselineArgs {
  std::string data = "data";
  std::vector<int> videos;
  double speed = std::numeric_limits<double>::infinity();
};

int cmd_baseline(const BaselineArgs& a) {
  auto videos = benchmark_videos(load_catalog(fs::absolute(a.data)));
  nlohmann::json out = nlohmann::json::array();
  const auto trad = e2e_latency_traditional(baseline::default_traditional_profile());
  for (const auto& v : videos) {
    if (!a.videos.empty() && std::find(a.videos.begin(), a.videos.end(), v.id) == a.videos.end()) continue;
    baseline::ReplayOptions ro;
    ro.speed = a.speed;
    const auto receipts = baseline::replay_receipts(baseline::load_trace(v.baseline_trace), ro);
    const auto up = transport::meter_bandwidth(receipts, transport::Direction::Uplink);
    const auto down = transport::meter_bandwidth(receipts, transport::Direction::Downlink);
    out.push_back(nlohmann::json{{"video", v.id},
                   {"uplink_mean_bps", quantize(up.mean_bps, 3)},
                   {"uplink_max_bps", quantize(up.max_bps, 3)},
                   {"downlink_mean_bps", quantize(down.mean_bps, 3)},
                   {"downlink_max_bps", quantize(down.max_bps, 3)},
                   {"e2e_latency_ms", to_ms(trad)}});
  }
  if (out.empty()) throw Error(Errc::DatasetMissing, "no matching benchmark video");
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

// ---- validate --------------------------------------------------------------------------

struct ValidateArgs {
  std::vector<std::string> files;
  bool json = false;
};

int cmd_validate(const ValidateArgs& a) {
  const auto profile = scene::ConstraintProfile::prompt_default();
  bool all_pass = true;
  for (const auto& f : a.files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) {
      std::cerr << "cannot read " << f << "\n";
      all_pass = false;
      continue;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto check = scene::check_markup(ss.str(), profile);
    all_pass = all_pass && check.report.passed();
    if (a.json) {
      auto j = scene::to_json(check.report);
      j["file"] = f;
      std::cout << j.dump() << "\n";
    } else if (check.report.passed()) {
      std::cout << "PASS " << f << "\n";
    } else {
      for (const auto& v : check.report.violations)
        std::cout << "FAIL " << f << " " << v.rule << " " << v.path << " " << v.message << "\n";
    }
  }
  return all_pass ? kExitOk : kExitValidation;
}

// ---- export-dataset --------------------------------------------------------------------

struct ExportArgs {
  Common common;
  std::string out;
  bool describer = true;
  bool coder = true;
};

int cmd_export(const ExportArgs& a) {
  auto [cfg, base] = resolve_config(a.common);
  BackendSet set(cfg, base);
  agents::ExchangeStore store;
  const auto report = bench::run_comparison(comparison_options(cfg, base), set.backends(&store));
  const auto summary = agents::export_finetune_dataset(store.snapshot(), a.out, {a.describer, a.coder});
  std::cout << "exported " << summary.exported << " dropped_failed " << summary.dropped_failed
            << " dropped_duplicates " << summary.dropped_duplicates << " dropped_by_filter "
            << summary.dropped_by_filter << "\n";
  return finish(report);
}

// ---- dt query --------------------------------------------------------------------------

struct DtArgs {
  std::string config_path;
  std::string log;
  double lat = 0, lon = 0, alt = 0;
  std::int64_t time_us = 0;
  std::uint64_t key = 0;
};

int cmd_dt_query(const DtArgs& a) {
  RunConfig cfg;
  if (!a.config_path.empty()) cfg = load_config(a.config_path);
  if (!fs::exists(a.log)) throw Error(Errc::StorageFailure, "no DT log at " + a.log);
  DTStore store(a.log);
  if (a.key > 0) {
    std::cout << dt_entry_json({a.key, store.fetch(a.key)}) << "\n";
  } else {
    std::cout << dt_entry_json(store.query_nearest({a.lat, a.lon, a.alt}, Micros{a.time_us}, cfg.dt_weights)) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semcast: semantic streaming gateway and benchmark runner"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "full comparison; writes report.json and report.md, prints the hash");
  add_common(*run_cmd, run.common);
  run_cmd->add_option("-o,--out", run.out_dir, "output directory");
  run_cmd->add_option("--dt-log", run.dt_log, "also store generated scenes in this DT log");

  StreamArgs stream;
  auto* stream_cmd = app.add_subcommand("stream", "live semantic pipeline over MQTT with the metrics endpoint");
  add_common(*stream_cmd, stream.common);
  stream_cmd->add_option("--broker-host", stream.broker_host, "MQTT broker host");
  stream_cmd->add_option("--broker-port", stream.broker_port, "MQTT broker port");
  stream_cmd->add_flag("--embedded-broker", stream.embedded_broker, "start an in-process broker");
  stream_cmd->add_option("--http-port", stream.http_port, "metrics/annotations port (0: any)");
  stream_cmd->add_option("--hold", stream.hold_s, "seconds to keep serving after the run");
  stream_cmd->add_option("--dt-log", stream.dt_log, "DT log path");
  stream_cmd->add_option("-o,--out", stream.out_dir, "write report.json here");

  BaselineArgs base;
  auto* base_cmd = app.add_subcommand("baseline", "replay conventional-stream traces and meter them");
  base_cmd->add_option("--data", base.data, "dataset directory");
  base_cmd->add_option("--video", base.videos, "benchmark video id (repeatable)");
  base_cmd->add_option("--speed", base.speed, "replay speed; default replays instantly")->check(CLI::PositiveNumber);

  ValidateArgs validate;
  auto* val_cmd = app.add_subcommand("validate", "check scene markup files against the prompt conditions");
  val_cmd->add_option("files", validate.files, "scene files")->required();
  val_cmd->add_flag("--json", validate.json, "one JSON report per line");

  ExportArgs exp;
  auto* exp_cmd = app.add_subcommand("export-dataset", "run the pipeline and write prompt/completion pairs");
  add_common(*exp_cmd, exp.common);
  exp_cmd->add_option("-o,--out", exp.out, "JSON-lines output")->required();
  bool coder_only = false, describer_only = false;
  auto* co = exp_cmd->add_flag("--coder-only", coder_only, "only code generation pairs");
  exp_cmd->add_flag("--describer-only", describer_only, "only description pairs")->excludes(co);

  DtArgs dt;
  auto* dt_cmd = app.add_subcommand("dt", "digital-twin store");
  dt_cmd->require_subcommand(1);
  auto* q_cmd = dt_cmd->add_subcommand("query", "nearest stored scene to a pose and time, or one entry by key");
  q_cmd->add_option("--log", dt.log, "DT log path")->required();
  q_cmd->add_option("-c,--config", dt.config_path, "config with distance scales")->check(CLI::ExistingFile);
  q_cmd->add_option("--lat", dt.lat, "degrees");
  q_cmd->add_option("--lon", dt.lon, "degrees");
  q_cmd->add_option("--alt", dt.alt, "metres");
  q_cmd->add_option("--time-us", dt.time_us, "microseconds");
  q_cmd->add_option("--key", dt.key, "fetch this key instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*stream_cmd) return cmd_stream(stream);
    if (*base_cmd) return cmd_baseline(base);
    if (*val_cmd) return cmd_validate(validate);
    if (*exp_cmd) {
      exp.describer = !coder_only;
      exp.coder = !describer_only;
      return cmd_export(exp);
    }
    if (*q_cmd) return cmd_dt_query(dt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
