#pragma once

#include "semcast/transport/metering.hpp"

#include <string>
#include <string_view>

namespace semcast::transport {

enum class Stream { Code, Mulse, Telemetry, Cmd, Metrics };

inline constexpr std::string_view kTopicRoot = "semcast";
inline constexpr std::string_view kAnnotationsPath = "/v1/annotations";
inline constexpr std::string_view kMetricsPath = "/v1/metrics";

inline constexpr std::string_view leaf(Stream s) {
  switch (s) {
    case Stream::Code: return "code";
    case Stream::Mulse: return "mulse";
    case Stream::Telemetry: return "telemetry";
    case Stream::Cmd: return "cmd";
    case Stream::Metrics: return "metrics";
  }
  return "?";
}

/// semcast/{stream}/{leaf}
inline std::string topic(std::string_view stream_id, Stream s) {
  std::string t(kTopicRoot);
  t += '/';
  t += stream_id;
  t += '/';
  t += leaf(s);
  return t;
}

/// Scene code and actuator frames must arrive; telemetry favours freshness.
inline constexpr int default_qos(Stream s) {
  switch (s) {
    case Stream::Code:
    case Stream::Mulse:
    case Stream::Cmd: return 1;
    case Stream::Telemetry:
    case Stream::Metrics: return 0;
  }
  return 0;
}

inline constexpr Direction direction_of(Stream s) {
  switch (s) {
    case Stream::Telemetry: return Direction::Uplink;
    case Stream::Code:
    case Stream::Mulse:
    case Stream::Metrics: return Direction::Downlink;
    case Stream::Cmd: return Direction::Control;
  }
  return Direction::Control;
}

/// Direction from a concrete topic name; unknown leaves count as control.
inline Direction direction_of_topic(std::string_view t) {
  const auto slash = t.rfind('/');
  const auto last = slash == std::string_view::npos ? t : t.substr(slash + 1);
  for (Stream s : {Stream::Code, Stream::Mulse, Stream::Telemetry, Stream::Cmd, Stream::Metrics})
    if (last == leaf(s)) return direction_of(s);
  return Direction::Control;
}

/// MQTT filter matching with '+' (one level) and a trailing '#'.
inline bool topic_matches(std::string_view filter, std::string_view name) {
  while (true) {
    const auto fs = filter.find('/');
    const auto ns = name.find('/');
    const auto fl = filter.substr(0, fs);
    const auto nl = name.substr(0, ns);
    if (fl == "#") return true;
    if (fl != "+" && fl != nl) return false;
    if (fs == std::string_view::npos || ns == std::string_view::npos) {
      if (fs == std::string_view::npos && ns == std::string_view::npos) return true;
      // "a/#" also matches "a"
      return ns == std::string_view::npos && filter.substr(fs + 1) == "#";
    }
    filter.remove_prefix(fs + 1);
    name.remove_prefix(ns + 1);
  }
}

}  // namespace semcast::transport
