#pragma once

#include "semcast/error.hpp"

#include <httplib.h>

#include <chrono>
#include <string>
#include <utility>

namespace semcast::http {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // begins with '/'
};

inline Endpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(Errc::ConfigError, "url without scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

/// POSTs a JSON body and returns the response body. Transport failures,
/// timeouts and non-2xx statuses raise `failure`.
inline std::string post_json(const std::string& url, const std::string& body, std::chrono::milliseconds timeout,
                             Errc failure, const std::string& bearer_token = {}) {
  const Endpoint ep = split_url(url);
  httplib::Client client(ep.base);
  const auto secs = static_cast<time_t>(timeout.count() / 1000);
  const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
  auto res = client.Post(ep.path, headers, body, "application/json");
  if (!res) throw Error(failure, url + ": " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw Error(failure, url + ": HTTP " + std::to_string(res->status));
  }
  return res->body;
}

}  // namespace semcast::http
