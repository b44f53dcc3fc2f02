#pragma once

#include "semcast/error.hpp"
#include "semcast/scene/markup.hpp"

#include <json.hpp>

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace semcast::scene {

/// Rule identifiers. One per checkable prompt condition, plus the
/// structural rules raised when a completion does not parse.
namespace rule {
inline constexpr std::string_view kForbiddenTag = "forbidden-tag";
inline constexpr std::string_view kScript = "script";
inline constexpr std::string_view kForbiddenAttribute = "forbidden-attribute";
inline constexpr std::string_view kExternalLink = "external-link";
inline constexpr std::string_view kMissingAnimation = "missing-animation";
inline constexpr std::string_view kDeprecatedAnimation = "deprecated-animation-element";
inline constexpr std::string_view kBackgroundComponent = "background-component";
inline constexpr std::string_view kMissingSky = "missing-sky";
inline constexpr std::string_view kMultipleCodeBlocks = "multiple-code-blocks";
inline constexpr std::string_view kPayloadTooLarge = "payload-too-large";
inline constexpr std::string_view kNonPrefixedTag = "non-prefixed-tag";
inline constexpr std::string_view kMalformedMarkup = "malformed-markup";
inline constexpr std::string_view kEmptyMarkup = "empty-markup";
}  // namespace rule

struct ConstraintProfile {
  std::set<std::string> forbidden_tags;
  std::set<std::string> forbidden_attribute_keys;
  bool forbid_external_links = true;
  bool require_animation = true;
  bool require_sky_element = false;
  std::size_t max_payload_bytes = 8192;
  // "Use high-quality detailed models" cannot be checked; scenes below this
  // many nodes get an advisory, never a violation.
  std::size_t detail_advisory_min_nodes = 4;

  static ConstraintProfile prompt_default() {
    ConstraintProfile p;
    p.forbidden_tags = {"a-assets", "a-light", "a-animation"};
    p.forbidden_attribute_keys = {"gltf-model", "glb-model"};
    return p;
  }

  bool operator==(const ConstraintProfile&) const = default;
};

inline void to_json(nlohmann::json& j, const ConstraintProfile& p) {
  j = nlohmann::json{{"forbidden_tags", p.forbidden_tags},
                     {"forbidden_attribute_keys", p.forbidden_attribute_keys},
                     {"forbid_external_links", p.forbid_external_links},
                     {"require_animation", p.require_animation},
                     {"require_sky_element", p.require_sky_element},
                     {"max_payload_bytes", p.max_payload_bytes},
                     {"detail_advisory_min_nodes", p.detail_advisory_min_nodes}};
}

inline void from_json(const nlohmann::json& j, ConstraintProfile& p) {
  static const std::set<std::string> known = {
      "forbidden_tags",      "forbidden_attribute_keys", "forbid_external_links", "require_animation",
      "require_sky_element", "max_payload_bytes",        "detail_advisory_min_nodes"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw Error(Errc::ConfigError, "unknown constraint key " + key);
  }
  p = ConstraintProfile::prompt_default();
  if (j.contains("forbidden_tags")) p.forbidden_tags = j.at("forbidden_tags").get<std::set<std::string>>();
  if (j.contains("forbidden_attribute_keys"))
    p.forbidden_attribute_keys = j.at("forbidden_attribute_keys").get<std::set<std::string>>();
  if (j.contains("forbid_external_links")) p.forbid_external_links = j.at("forbid_external_links").get<bool>();
  if (j.contains("require_animation")) p.require_animation = j.at("require_animation").get<bool>();
  if (j.contains("require_sky_element")) p.require_sky_element = j.at("require_sky_element").get<bool>();
  if (j.contains("max_payload_bytes")) p.max_payload_bytes = j.at("max_payload_bytes").get<std::size_t>();
  if (j.contains("detail_advisory_min_nodes"))
    p.detail_advisory_min_nodes = j.at("detail_advisory_min_nodes").get<std::size_t>();
  if (p.max_payload_bytes == 0) throw Error(Errc::ConfigError, "max_payload_bytes must be positive");
}

struct Violation {
  std::string rule;
  std::string path;       // "/" for graph-level rules
  std::string attribute;  // offending attribute, empty when the node itself is the breach
  std::string message;
  bool operator==(const Violation&) const = default;
};

enum class Verdict { Pass, Fail };

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> advisories;
  SceneStats stats;

  Verdict verdict() const { return violations.empty() ? Verdict::Pass : Verdict::Fail; }
  bool passed() const { return violations.empty(); }
  bool has_rule(std::string_view id) const {
    for (const auto& v : violations)
      if (v.rule == id) return true;
    return false;
  }
};

inline nlohmann::json to_json(const SceneStats& s) {
  return {{"node_count", s.node_count},
          {"max_depth", s.max_depth},
          {"animated_node_count", s.animated_node_count},
          {"payload_bytes", s.payload_bytes},
          {"distinct_tag_histogram", s.distinct_tag_histogram}};
}

inline nlohmann::json to_json(const ValidationReport& r) {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"rule", v.rule}, {"path", v.path}, {"attribute", v.attribute}, {"message", v.message}});
  }
  return {{"verdict", r.passed() ? "pass" : "fail"},
          {"violations", std::move(violations)},
          {"advisories", r.advisories},
          {"stats", to_json(r.stats)}};
}

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool has_external_url(std::string_view value) {
  const std::string v = lower(value);
  if (v.find("http://") != std::string::npos || v.find("https://") != std::string::npos) return true;
  // Protocol-relative: "//host" as the whole value, a component property
  // ("src: //host") or a url() argument.
  for (auto at = v.find("//"); at != std::string::npos; at = v.find("//", at + 2)) {
    auto before = at;
    while (before > 0 && (v[before - 1] == ' ' || v[before - 1] == '\t')) --before;
    if (before == 0 || v[before - 1] == ':' || v[before - 1] == '(' || v[before - 1] == ';') return true;
  }
  return false;
}

inline bool is_model_file(std::string_view value) {
  const std::string v = lower(trim(value));
  auto ends = [&](std::string_view ext) {
    return v.size() >= ext.size() && v.compare(v.size() - ext.size(), ext.size(), ext) == 0;
  };
  return ends(".gltf") || ends(".glb");
}

class RuleWalker {
 public:
  RuleWalker(const ConstraintProfile& profile, std::vector<Violation>& out) : profile_(profile), out_(out) {}

  void walk(const SceneNode& node, const std::string& path) {
    check_tag(node, path);
    for (const auto& attr : node.attributes) check_attribute(attr, path);
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      walk(node.children[i], child_path(path, node.children[i], i));
    }
  }

 private:
  void add(std::string_view rule, const std::string& path, const std::string& attribute, std::string message) {
    out_.push_back({std::string(rule), path, attribute, std::move(message)});
  }

  void check_tag(const SceneNode& node, const std::string& path) {
    if (profile_.forbidden_tags.count(node.tag)) {
      if (node.tag == "a-animation") {
        add(rule::kDeprecatedAnimation, path, "", "use the animation component instead of <a-animation>");
      } else {
        add(rule::kForbiddenTag, path, "", "<" + node.tag + "> is not allowed");
      }
      return;
    }
    // <a-gltf-model> is the primitive form of the gltf-model component.
    for (const auto& key : profile_.forbidden_attribute_keys) {
      if (node.tag == std::string(kTagPrefix) + key) {
        add(rule::kForbiddenAttribute, path, "", "<" + node.tag + "> loads a model file");
        return;
      }
    }
  }

  void check_attribute(const Attribute& attr, const std::string& path) {
    const std::string name = lower(attr.name);
    const std::string value = lower(attr.value);
    if (name.rfind("on", 0) == 0 || value.find("javascript:") != std::string::npos) {
      add(rule::kScript, path, attr.name, "script in attribute " + attr.name);
      return;
    }
    if (profile_.forbidden_attribute_keys.count(name)) {
      add(rule::kForbiddenAttribute, path, attr.name, attr.name + " is not allowed");
      return;
    }
    if (profile_.forbid_external_links && has_external_url(attr.value)) {
      add(rule::kExternalLink, path, attr.name, "external link in " + attr.name);
      return;
    }
    if (name == "src" && is_model_file(attr.value)) {
      add(rule::kForbiddenAttribute, path, attr.name, "model file in src");
      return;
    }
    if (name == "background") {
      add(rule::kBackgroundComponent, path, attr.name, "use <a-sky> instead of the background component");
    }
  }

  const ConstraintProfile& profile_;
  std::vector<Violation>& out_;
};

}  // namespace detail

/// Checks a parsed scene against the profile. Every breach is a report
/// entry; nothing here throws.
inline ValidationReport validate_constraints(const SceneGraph& graph, const ConstraintProfile& profile) {
  ValidationReport report;
  report.stats = scene_stats(graph);
  detail::RuleWalker walker(profile, report.violations);
  for (std::size_t i = 0; i < graph.roots.size(); ++i) {
    walker.walk(graph.roots[i], detail::child_path("", graph.roots[i], i));
  }
  if (profile.require_animation && report.stats.animated_node_count == 0) {
    report.violations.push_back({std::string(rule::kMissingAnimation), "/", "", "scene has no animation component"});
  }
  if (profile.require_sky_element && !graph.declared_sky) {
    report.violations.push_back({std::string(rule::kMissingSky), "/", "", "scene has no <a-sky>"});
  }
  if (report.stats.payload_bytes > profile.max_payload_bytes) {
    report.violations.push_back({std::string(rule::kPayloadTooLarge), "/", "",
                                 std::to_string(report.stats.payload_bytes) + " bytes exceeds " +
                                     std::to_string(profile.max_payload_bytes)});
  }
  if (report.stats.node_count < profile.detail_advisory_min_nodes) {
    report.advisories.push_back("low-detail: " + std::to_string(report.stats.node_count) + " nodes");
  }
  return report;
}

struct MarkupCheck {
  std::optional<SceneGraph> graph;
  ValidationReport report;
};

inline std::string_view rule_for_parse_error(Errc code, std::string_view detail) {
  switch (code) {
    case Errc::MultipleCodeBlocks: return rule::kMultipleCodeBlocks;
    case Errc::NonPrefixedTag:
      return detail.rfind("<script>", 0) == 0 ? rule::kScript : rule::kNonPrefixedTag;
    case Errc::EmptyInput: return rule::kEmptyMarkup;
    default: return rule::kMalformedMarkup;
  }
}

/// Parse + validate a raw completion. Parse failures become a single
/// violation so the caller always gets a report.
inline MarkupCheck check_markup(std::string_view text, const ConstraintProfile& profile) {
  MarkupCheck out;
  try {
    out.graph = parse_scene_markup(text);
  } catch (const Error& e) {
    std::string what = e.what();
    const std::string detail = what.substr(what.find(": ") + 2);
    out.report.violations.push_back({std::string(rule_for_parse_error(e.code(), detail)), "/", "", what});
    return out;
  }
  out.report = validate_constraints(*out.graph, profile);
  return out;
}

}  // namespace semcast::scene
