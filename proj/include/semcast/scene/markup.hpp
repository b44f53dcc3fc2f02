#pragma once

#include "semcast/error.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semcast::scene {

inline constexpr std::string_view kTagPrefix = "a-";
inline constexpr std::size_t kMaxDepth = 128;

struct Attribute {
  std::string name;
  std::string value;
  bool operator==(const Attribute&) const = default;
};

/// `animation` / `animation__<id>` attribute payload, split into its
/// `key: value` properties in source order.
struct AnimationComponent {
  std::string name;
  std::vector<std::pair<std::string, std::string>> properties;

  const std::string* property(std::string_view key) const {
    for (const auto& [k, v] : properties)
      if (k == key) return &v;
    return nullptr;
  }
  bool operator==(const AnimationComponent&) const = default;
};

struct SceneNode {
  std::string tag;
  std::vector<Attribute> attributes;
  std::vector<SceneNode> children;
  std::vector<AnimationComponent> animation_components;

  const std::string* attribute(std::string_view name) const {
    for (const auto& a : attributes)
      if (a.name == name) return &a.value;
    return nullptr;
  }
  bool animated() const { return !animation_components.empty(); }
  bool operator==(const SceneNode&) const = default;
};

struct SkyNode {
  std::string path;
  std::string color;
  bool operator==(const SkyNode&) const = default;
};

struct SceneGraph {
  std::vector<SceneNode> roots;
  std::optional<SkyNode> declared_sky;
  std::size_t source_bytes = 0;

  bool empty() const { return roots.empty(); }
};

/// Same element tree (tags, ordered attributes, children). Ignores
/// source_bytes, which depends on the original formatting.
inline bool structurally_equal(const SceneGraph& a, const SceneGraph& b) {
  return a.roots == b.roots && a.declared_sky == b.declared_sky;
}

struct SceneStats {
  std::size_t node_count = 0;
  std::size_t max_depth = 0;
  std::size_t animated_node_count = 0;
  std::size_t payload_bytes = 0;
  std::map<std::string, std::size_t> distinct_tag_histogram;
  bool operator==(const SceneStats&) const = default;
};

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline bool is_name_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

inline bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

}  // namespace detail

/// Returns the markup to parse: the contents of the single fenced block if
/// the text is fenced, the whole text otherwise. Fences are lines whose
/// first non-blank characters are three backticks.
inline std::string_view extract_code_block(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> fences;  // (line start, line end)
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = detail::trim(text.substr(pos, eol - pos));
    if (line.substr(0, 3) == "```") fences.emplace_back(pos, eol);
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  if (fences.empty()) return text;
  if (fences.size() >= 4) {
    throw Error(Errc::MultipleCodeBlocks,
                std::to_string(fences.size() / 2) + " fenced blocks; expected one");
  }
  if (fences.size() != 2) throw Error(Errc::MalformedMarkup, "unterminated code fence");
  const std::size_t body_start = std::min(fences[0].second + 1, text.size());
  return text.substr(body_start, fences[1].first - body_start);
}

/// Bodies of every fenced block, in order; the whole text when unfenced.
inline std::vector<std::string_view> split_code_blocks(std::string_view text) {
  std::vector<std::string_view> blocks;
  std::optional<std::size_t> open;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    if (detail::trim(text.substr(pos, eol - pos)).substr(0, 3) == "```") {
      if (open) {
        blocks.push_back(text.substr(*open, pos - *open));
        open.reset();
      } else {
        open = std::min(eol + 1, text.size());
      }
    }
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  if (blocks.empty() && !open) blocks.push_back(text);
  return blocks;
}

inline std::vector<AnimationComponent> parse_animation_components(const std::vector<Attribute>& attrs) {
  std::vector<AnimationComponent> out;
  for (const auto& attr : attrs) {
    if (attr.name != "animation" && attr.name.rfind("animation__", 0) != 0) continue;
    AnimationComponent comp{attr.name, {}};
    std::string_view rest = attr.value;
    while (!rest.empty()) {
      const std::size_t semi = rest.find(';');
      std::string_view seg = detail::trim(rest.substr(0, semi));
      rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
      if (seg.empty()) continue;
      const std::size_t colon = seg.find(':');
      if (colon == std::string_view::npos || detail::trim(seg.substr(0, colon)).empty()) {
        throw Error(Errc::MalformedAttribute,
                    "animation property '" + std::string(seg) + "' in " + attr.name);
      }
      comp.properties.emplace_back(std::string(detail::trim(seg.substr(0, colon))),
                                   std::string(detail::trim(seg.substr(colon + 1))));
    }
    if (comp.properties.empty()) throw Error(Errc::MalformedAttribute, "empty " + attr.name);
    out.push_back(std::move(comp));
  }
  return out;
}

namespace detail {

class MarkupParser {
 public:
  explicit MarkupParser(std::string_view src) : src_(src) {}

  std::vector<SceneNode> parse() {
    std::vector<SceneNode> roots;
    std::vector<SceneNode> stack;
    auto attach = [&](SceneNode node) {
      if (stack.empty())
        roots.push_back(std::move(node));
      else
        stack.back().children.push_back(std::move(node));
    };

    for (;;) {
      skip_text();
      if (at_end()) break;
      if (starts_with("<!--")) {
        skip_comment();
        continue;
      }
      if (starts_with("</")) {
        pos_ += 2;
        const std::string name = read_name();
        skip_space();
        expect('>', Errc::UnbalancedTag, "closing tag </" + name);
        if (stack.empty()) throw fail(Errc::UnbalancedTag, "unexpected </" + name + ">");
        if (stack.back().tag != name) {
          throw fail(Errc::UnbalancedTag, "</" + name + "> closes <" + stack.back().tag + ">");
        }
        SceneNode done = std::move(stack.back());
        stack.pop_back();
        attach(std::move(done));
        continue;
      }
      if (starts_with("<!") || starts_with("<?")) {
        throw fail(Errc::MalformedMarkup, "declarations are not part of the dialect");
      }
      expect('<', Errc::MalformedMarkup, "element start");
      SceneNode node;
      node.tag = read_name();
      if (node.tag.rfind(kTagPrefix, 0) != 0) {
        throw fail(Errc::NonPrefixedTag, "<" + node.tag + ">");
      }
      bool self_closing = read_attributes(node);
      node.animation_components = parse_animation_components(node.attributes);
      if (self_closing) {
        attach(std::move(node));
      } else {
        if (stack.size() + 1 >= kMaxDepth) throw fail(Errc::MalformedMarkup, "nesting too deep");
        stack.push_back(std::move(node));
      }
    }
    if (!stack.empty()) throw fail(Errc::UnbalancedTag, "<" + stack.back().tag + "> is never closed");
    return roots;
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }
  bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  Error fail(Errc code, const std::string& what) const {
    return Error(code, what + " at byte " + std::to_string(pos_));
  }

  void expect(char c, Errc code, const std::string& context) {
    if (at_end() || src_[pos_] != c) throw fail(code, "expected '" + std::string(1, c) + "' in " + context);
    ++pos_;
  }

  void skip_space() {
    while (!at_end() && is_space(src_[pos_])) ++pos_;
  }

  // Only whitespace may appear between elements.
  void skip_text() {
    skip_space();
    if (!at_end() && src_[pos_] != '<') throw fail(Errc::MalformedMarkup, "text content outside attributes");
  }

  void skip_comment() {
    const std::size_t end = src_.find("-->", pos_ + 4);
    if (end == std::string_view::npos) throw fail(Errc::MalformedMarkup, "unterminated comment");
    pos_ = end + 3;
  }

  std::string read_name() {
    const std::size_t start = pos_;
    if (at_end() || !is_name_start(src_[pos_])) throw fail(Errc::MalformedMarkup, "expected a tag name");
    while (!at_end() && is_name_char(src_[pos_])) ++pos_;
    if (!at_end() && src_[pos_] == ':') throw fail(Errc::MalformedMarkup, "namespaced names are not supported");
    return std::string(src_.substr(start, pos_ - start));
  }

  // Returns true for `/>`.
  bool read_attributes(SceneNode& node) {
    for (;;) {
      const std::size_t before = pos_;
      skip_space();
      if (at_end()) throw fail(Errc::UnbalancedTag, "<" + node.tag + " is not terminated");
      if (starts_with("/>")) {
        pos_ += 2;
        return true;
      }
      if (src_[pos_] == '>') {
        ++pos_;
        return false;
      }
      if (pos_ == before) throw fail(Errc::MalformedAttribute, "attributes must be separated by whitespace");
      if (!is_name_start(src_[pos_])) throw fail(Errc::MalformedAttribute, "bad attribute name in <" + node.tag + ">");
      std::string name;
      {
        const std::size_t start = pos_;
        while (!at_end() && is_name_char(src_[pos_])) ++pos_;
        name.assign(src_.substr(start, pos_ - start));
        if (!at_end() && src_[pos_] == ':') throw fail(Errc::MalformedAttribute, "namespaced attribute " + name);
      }
      if (node.attribute(name)) throw fail(Errc::MalformedAttribute, "duplicate attribute " + name);
      skip_space();
      std::string value;
      if (!at_end() && src_[pos_] == '=') {
        ++pos_;
        skip_space();
        value = read_quoted(name);
      }
      node.attributes.push_back({std::move(name), std::move(value)});
    }
  }

  std::string read_quoted(const std::string& name) {
    if (at_end() || (src_[pos_] != '"' && src_[pos_] != '\'')) {
      throw fail(Errc::MalformedAttribute, "unquoted value for " + name);
    }
    const char quote = src_[pos_++];
    std::string value;
    for (;;) {
      if (at_end()) throw fail(Errc::MalformedAttribute, "unterminated value for " + name);
      const char c = src_[pos_];
      if (c == quote) {
        ++pos_;
        return value;
      }
      if (c == '<') throw fail(Errc::MalformedAttribute, "'<' inside value of " + name);
      if (c == '&') {
        value += read_entity(name);
        continue;
      }
      value.push_back(c);
      ++pos_;
    }
  }

  std::string read_entity(const std::string& name) {
    const std::size_t semi = src_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 10) throw fail(Errc::MalformedAttribute, "bad entity in " + name);
    const std::string_view ent = src_.substr(pos_ + 1, semi - pos_ - 1);
    std::string out;
    if (ent == "amp") out = "&";
    else if (ent == "lt") out = "<";
    else if (ent == "gt") out = ">";
    else if (ent == "quot") out = "\"";
    else if (ent == "apos") out = "'";
    else if (ent.size() > 1 && ent[0] == '#') {
      unsigned long cp = 0;
      try {
        std::size_t used = 0;
        const std::string digits(ent[1] == 'x' ? ent.substr(2) : ent.substr(1));
        cp = std::stoul(digits, &used, ent[1] == 'x' ? 16 : 10);
        if (used != digits.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw fail(Errc::MalformedAttribute, "bad character reference in " + name);
      }
      out = encode_utf8(cp, name);
    } else {
      throw fail(Errc::MalformedAttribute, "unknown entity &" + std::string(ent) + "; in " + name);
    }
    pos_ = semi + 1;
    return out;
  }

  std::string encode_utf8(unsigned long cp, const std::string& name) const {
    std::string out;
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw fail(Errc::MalformedAttribute, "invalid code point in " + name);
    }
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline std::string child_path(const std::string& parent, const SceneNode& node, std::size_t index) {
  return parent + "/" + node.tag + "[" + std::to_string(index) + "]";
}

inline const SceneNode* find_first(const std::vector<SceneNode>& nodes, std::string_view tag,
                                   const std::string& parent, std::string& path_out) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = child_path(parent, nodes[i], i);
    if (nodes[i].tag == tag) {
      path_out = path;
      return &nodes[i];
    }
    if (const SceneNode* hit = find_first(nodes[i].children, tag, path, path_out)) return hit;
  }
  return nullptr;
}

}  // namespace detail

inline void refresh_sky(SceneGraph& graph) {
  std::string path;
  if (const SceneNode* sky = detail::find_first(graph.roots, "a-sky", "", path)) {
    const std::string* color = sky->attribute("color");
    graph.declared_sky = SkyNode{path, color ? *color : std::string{}};
  } else {
    graph.declared_sky.reset();
  }
}

/// Parses one LLM completion (optionally fenced) into a scene graph.
inline SceneGraph parse_scene_markup(std::string_view text) {
  if (detail::trim(text).empty()) throw Error(Errc::EmptyInput, "no markup");
  const std::string_view body = extract_code_block(text);
  if (detail::trim(body).empty()) throw Error(Errc::EmptyInput, "empty code block");
  SceneGraph graph;
  graph.roots = detail::MarkupParser(body).parse();
  if (graph.roots.empty()) throw Error(Errc::EmptyInput, "no elements");
  graph.source_bytes = text.size();
  refresh_sky(graph);
  return graph;
}

namespace detail {

inline void escape_into(std::string& out, std::string_view value) {
  for (char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
}

inline void serialize_node(std::string& out, const SceneNode& node) {
  out.push_back('<');
  out += node.tag;
  for (const auto& attr : node.attributes) {
    out.push_back(' ');
    out += attr.name;
    out += "=\"";
    escape_into(out, attr.value);
    out.push_back('"');
  }
  out.push_back('>');
  for (const auto& child : node.children) serialize_node(out, child);
  out += "</";
  out += node.tag;
  out.push_back('>');
}

}  // namespace detail

/// Canonical text: attributes in source order, single-space separated,
/// explicit close tags, no whitespace between elements.
inline std::string serialize_scene(const SceneGraph& graph) {
  if (graph.empty()) throw Error(Errc::EmptyGraph, "nothing to serialize");
  std::string out;
  for (const auto& root : graph.roots) detail::serialize_node(out, root);
  return out;
}

inline SceneStats scene_stats(const SceneGraph& graph) {
  SceneStats stats;
  auto walk = [&](auto&& self, const SceneNode& node, std::size_t depth) -> void {
    ++stats.node_count;
    stats.max_depth = std::max(stats.max_depth, depth);
    if (node.animated()) ++stats.animated_node_count;
    ++stats.distinct_tag_histogram[node.tag];
    for (const auto& child : node.children) self(self, child, depth + 1);
  };
  for (const auto& root : graph.roots) walk(walk, root, 1);
  stats.payload_bytes = graph.empty() ? 0 : serialize_scene(graph).size();
  return stats;
}

// Node paths look like "/a-scene[0]/a-box[2]": tag plus index among siblings.

namespace detail {

inline std::vector<std::pair<std::string, std::size_t>> split_path(std::string_view path) {
  std::vector<std::pair<std::string, std::size_t>> steps;
  if (path.empty() || path.front() != '/') throw Error(Errc::BadNodePath, std::string(path));
  path.remove_prefix(1);
  while (!path.empty()) {
    const std::size_t slash = path.find('/');
    std::string_view step = path.substr(0, slash);
    path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash + 1);
    const std::size_t open = step.find('[');
    if (open == std::string_view::npos || step.back() != ']') throw Error(Errc::BadNodePath, std::string(step));
    const std::string idx(step.substr(open + 1, step.size() - open - 2));
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos) {
      throw Error(Errc::BadNodePath, std::string(step));
    }
    steps.emplace_back(std::string(step.substr(0, open)), std::stoul(idx));
  }
  return steps;
}

}  // namespace detail

inline SceneNode& node_at(SceneGraph& graph, std::string_view path) {
  auto steps = detail::split_path(path);
  if (steps.empty()) throw Error(Errc::BadNodePath, "root has no node");
  std::vector<SceneNode>* level = &graph.roots;
  SceneNode* node = nullptr;
  for (const auto& [tag, idx] : steps) {
    if (idx >= level->size() || (*level)[idx].tag != tag) throw Error(Errc::BadNodePath, std::string(path));
    node = &(*level)[idx];
    level = &node->children;
  }
  return *node;
}

/// Copy of `graph` without the node at `path` (and its subtree).
inline SceneGraph remove_node(SceneGraph graph, std::string_view path) {
  auto steps = detail::split_path(path);
  if (steps.empty()) throw Error(Errc::BadNodePath, "cannot remove the root");
  std::vector<SceneNode>* level = &graph.roots;
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    const auto& [tag, idx] = steps[i];
    if (idx >= level->size() || (*level)[idx].tag != tag) throw Error(Errc::BadNodePath, std::string(path));
    level = &(*level)[idx].children;
  }
  const auto& [tag, idx] = steps.back();
  if (idx >= level->size() || (*level)[idx].tag != tag) throw Error(Errc::BadNodePath, std::string(path));
  level->erase(level->begin() + static_cast<std::ptrdiff_t>(idx));
  refresh_sky(graph);
  return graph;
}

/// Copy of `graph` with one attribute dropped from the node at `path`.
inline SceneGraph remove_attribute(SceneGraph graph, std::string_view path, std::string_view name) {
  SceneNode& node = node_at(graph, path);
  std::erase_if(node.attributes, [&](const Attribute& a) { return a.name == name; });
  node.animation_components = parse_animation_components(node.attributes);
  refresh_sky(graph);
  return graph;
}

}  // namespace semcast::scene
