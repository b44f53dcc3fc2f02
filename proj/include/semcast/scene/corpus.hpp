#pragma once

#include "semcast/dataset.hpp"
#include "semcast/scene/constraints.hpp"
#include "semcast/scene/markup.hpp"

#include <filesystem>
#include <fstream>
#include <set>

namespace semcast::scene {

struct CorpusScene {
  std::filesystem::path file;
  std::string text;
  std::optional<std::string> expected_rule;  // set for adversarial scenes
};

struct Corpus {
  std::vector<CorpusScene> compliant;
  std::vector<CorpusScene> adversarial;
};

/// Reads manifest.json: {"compliant":[{file}], "adversarial":[{file, rule}]}.
inline Corpus load_corpus(const std::filesystem::path& dir) {
  const auto manifest = read_json_file(dir / "manifest.json");
  Corpus c;
  auto read = [&](const nlohmann::json& item, bool adversarial) {
    CorpusScene s;
    try {
      s.file = dir / item.at("file").get<std::string>();
      if (adversarial) s.expected_rule = item.at("rule").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseFailure, "scene manifest: " + std::string(e.what()));
    }
    std::ifstream in(s.file, std::ios::binary);
    if (!in) throw Error(Errc::DatasetMissing, "missing scene " + s.file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    s.text = ss.str();
    return s;
  };
  for (const auto& item : manifest.value("compliant", nlohmann::json::array())) c.compliant.push_back(read(item, false));
  for (const auto& item : manifest.value("adversarial", nlohmann::json::array())) c.adversarial.push_back(read(item, true));
  return c;
}

inline std::set<std::string> violated_rules(const ValidationReport& r) {
  std::set<std::string> rules;
  for (const auto& v : r.violations) rules.insert(v.rule);
  return rules;
}

/// Every fenced block parses, serializes and re-parses to an equal graph.
/// Files with several blocks are checked block by block.
inline bool round_trips(std::string_view text) {
  const auto blocks = split_code_blocks(text);
  for (const auto block : blocks) {
    try {
      const auto graph = parse_scene_markup(block);
      if (!structurally_equal(graph, parse_scene_markup(serialize_scene(graph)))) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return !blocks.empty();
}

}  // namespace semcast::scene
