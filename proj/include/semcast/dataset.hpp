#pragma once

#include "semcast/error.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace semcast {

struct VideoEntry {
  int id = 0;
  std::string name;
  int duration_s = 0;
  int fps = 30;
  std::string role;  // "benchmark" or "validation"
  std::filesystem::path annotation_trace;
  std::filesystem::path baseline_trace;  // empty when the video has none

  bool benchmark() const { return role == "benchmark"; }
};

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::DatasetMissing, path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, path.string() + ": " + e.what());
  }
}

/// Reads videos.json under `root`; trace paths come back absolute.
inline std::vector<VideoEntry> load_catalog(const std::filesystem::path& root) {
  const auto doc = read_json_file(root / "videos.json");
  std::vector<VideoEntry> out;
  try {
    for (const auto& v : doc.at("videos")) {
      VideoEntry e;
      e.id = v.at("id").get<int>();
      e.name = v.at("name").get<std::string>();
      e.duration_s = v.at("duration_s").get<int>();
      e.fps = v.value("fps", 30);
      e.role = v.value("role", "benchmark");
      e.annotation_trace = root / v.at("annotation_trace").get<std::string>();
      if (v.contains("baseline_trace")) e.baseline_trace = root / v.at("baseline_trace").get<std::string>();
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, "videos.json: " + std::string(e.what()));
  }
  if (out.empty()) throw Error(Errc::DatasetMissing, "videos.json lists no videos");
  return out;
}

inline std::vector<VideoEntry> benchmark_videos(const std::vector<VideoEntry>& all) {
  std::vector<VideoEntry> out;
  for (const auto& v : all)
    if (v.benchmark()) out.push_back(v);
  return out;
}

}  // namespace semcast
