#pragma once

#include <json.hpp>

#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace semcast {

/// Rounds to `decimals` places such that the result is the double nearest
/// to the printed decimal, which makes fixed-format encode/decode lossless.
inline double quantize(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double q = std::round(value * scale) / scale;
  return q == 0.0 ? 0.0 : q;  // folds -0.0
}

inline std::string format_fixed(double value, int decimals) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), quantize(value, decimals),
                           std::chars_format::fixed, decimals);
  return std::string(buf, res.ptr);
}

/// Compact JSON writer for canonical encodings: no whitespace, numbers in
/// fixed decimal precision chosen per field, keys emitted by the caller in
/// ascending order (asserted).
class CanonicalJsonWriter {
 public:
  CanonicalJsonWriter& begin_object() {
    separate();
    out_.push_back('{');
    frames_.push_back({true, true, {}});
    return *this;
  }

  CanonicalJsonWriter& end_object() {
    assert(!frames_.empty() && frames_.back().object);
    frames_.pop_back();
    out_.push_back('}');
    return *this;
  }

  CanonicalJsonWriter& begin_array() {
    separate();
    out_.push_back('[');
    frames_.push_back({false, true, {}});
    return *this;
  }

  CanonicalJsonWriter& end_array() {
    assert(!frames_.empty() && !frames_.back().object);
    frames_.pop_back();
    out_.push_back(']');
    return *this;
  }

  CanonicalJsonWriter& key(std::string_view name) {
    assert(!frames_.empty() && frames_.back().object);
    auto& frame = frames_.back();
    assert(frame.first || frame.last_key < name);
    if (!frame.first) out_.push_back(',');
    frame.first = false;
    frame.last_key = std::string(name);
    append_string(name);
    out_.push_back(':');
    pending_value_ = true;
    return *this;
  }

  CanonicalJsonWriter& string(std::string_view value) {
    separate();
    append_string(value);
    return *this;
  }

  CanonicalJsonWriter& fixed(double value, int decimals) {
    separate();
    out_ += format_fixed(value, decimals);
    return *this;
  }

  CanonicalJsonWriter& integer(std::int64_t value) {
    separate();
    out_ += std::to_string(value);
    return *this;
  }

  CanonicalJsonWriter& boolean(bool value) {
    separate();
    out_ += value ? "true" : "false";
    return *this;
  }

  CanonicalJsonWriter& null() {
    separate();
    out_ += "null";
    return *this;
  }

  /// Splices an already-canonical JSON value.
  CanonicalJsonWriter& raw(std::string_view json) {
    separate();
    out_ += json;
    return *this;
  }

  const std::string& str() const { return out_; }
  std::string take() { return std::move(out_); }

 private:
  struct Frame {
    bool object;
    bool first;
    std::string last_key;
  };

  void separate() {
    if (pending_value_) {
      pending_value_ = false;
      return;
    }
    if (!frames_.empty()) {
      auto& frame = frames_.back();
      assert(!frame.object);
      if (!frame.first) out_.push_back(',');
      frame.first = false;
    }
  }

  void append_string(std::string_view s) { out_ += nlohmann::json(std::string(s)).dump(); }

  std::string out_;
  std::vector<Frame> frames_;
  bool pending_value_ = false;
};

}  // namespace semcast
