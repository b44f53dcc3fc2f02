#pragma once

#include "semcast/error.hpp"
#include "semcast/uplink/packet.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>

namespace semcast::uplink {

class DetectionAdapter {
 public:
  virtual ~DetectionAdapter() = default;
  virtual DetectionSet detect(const FrameTicket& frame) = 0;
};

class CaptionAdapter {
 public:
  virtual ~CaptionAdapter() = default;
  virtual Caption caption(const FrameTicket& frame) = 0;
};

inline DetectionSet detect_objects(const FrameTicket& frame, DetectionAdapter& adapter) {
  DetectionSet set = adapter.detect(frame);
  check_detections(set);
  return set;
}

inline Caption caption_frame(const FrameTicket& frame, CaptionAdapter& adapter) {
  Caption c = adapter.caption(frame);
  if (c.text.empty()) throw Error(Errc::AdapterUnavailable, "adapter returned an empty caption");
  return c;
}

/// One line of a per-video annotation trace.
struct TraceEntry {
  std::uint64_t frame_index = 0;
  DetectionSet detections;
  std::string caption;
  TelemetryPacket telemetry;
};

inline TraceEntry trace_entry_from_json(const nlohmann::json& j) {
  TraceEntry e;
  e.frame_index = j.at("frame_index").get<std::uint64_t>();
  for (const auto& d : j.at("detections")) e.detections.push_back(detection_from_json(d));
  e.caption = j.at("caption").get<std::string>();
  e.telemetry = telemetry_from_json(j.at("telemetry"));
  return e;
}

/// Authored detector/captioner output for one video, keyed by frame index.
class AnnotationTrace {
 public:
  AnnotationTrace() = default;
  explicit AnnotationTrace(std::string caption_model) : caption_model_(std::move(caption_model)) {}

  static AnnotationTrace load(const std::filesystem::path& path, std::string caption_model = "inception-v3-lstm") {
    std::ifstream in(path);
    if (!in) throw Error(Errc::DatasetMissing, "cannot open trace " + path.string());
    AnnotationTrace trace(std::move(caption_model));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        trace.add(trace_entry_from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseFailure, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return trace;
  }

  void add(TraceEntry entry) {
    const auto index = entry.frame_index;
    entries_[index] = std::move(entry);
  }

  const TraceEntry& at(std::uint64_t frame_index) const {
    auto it = entries_.find(frame_index);
    if (it == entries_.end()) throw Error(Errc::TraceMiss, "no trace entry for frame " + std::to_string(frame_index));
    return it->second;
  }

  const std::map<std::uint64_t, TraceEntry>& entries() const { return entries_; }
  const std::string& caption_model() const { return caption_model_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::string caption_model_ = "inception-v3-lstm";
  std::map<std::uint64_t, TraceEntry> entries_;
};

/// Replays authored detections and captions deterministically.
class ReplayAdapter final : public DetectionAdapter, public CaptionAdapter {
 public:
  explicit ReplayAdapter(std::shared_ptr<const AnnotationTrace> trace) : trace_(std::move(trace)) {}

  DetectionSet detect(const FrameTicket& frame) override { return trace_->at(frame.frame_index).detections; }
  Caption caption(const FrameTicket& frame) override {
    return {trace_->at(frame.frame_index).caption, trace_->caption_model()};
  }

 private:
  std::shared_ptr<const AnnotationTrace> trace_;
};

class ConstantAdapter final : public DetectionAdapter, public CaptionAdapter {
 public:
  ConstantAdapter(DetectionSet detections, Caption caption)
      : detections_(std::move(detections)), caption_(std::move(caption)) {}

  DetectionSet detect(const FrameTicket&) override { return detections_; }
  Caption caption(const FrameTicket&) override { return caption_; }

 private:
  DetectionSet detections_;
  Caption caption_;
};

}  // namespace semcast::uplink
