#pragma once

#include "semcast/agents/prompt.hpp"
#include "semcast/clock.hpp"
#include "semcast/error.hpp"
#include "semcast/hash.hpp"
#include "semcast/http.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>

namespace semcast::agents {

inline constexpr std::size_t kBytesPerToken = 4;
inline constexpr int kDefaultDescriberTokenCap = 256;
// 150 tokens leave room for the fence around a ~500-byte scene: one scene per
// second then costs about 4 kbit/s downstream.
inline constexpr int kDefaultCoderTokenCap = 150;

inline std::size_t approx_tokens(std::string_view text) { return (text.size() + kBytesPerToken - 1) / kBytesPerToken; }

enum class BackendMode { Remote, Mock };

struct Completion {
  std::string text;
  bool truncated = false;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string model_id() const = 0;
  virtual int token_cap() const = 0;
  virtual BackendMode mode() const = 0;
  virtual Completion complete(const PromptText& prompt) = 0;
};

/// Cuts `text` to `cap` tokens, backing off so a UTF-8 sequence is never split.
inline Completion apply_token_cap(std::string text, int cap) {
  const std::size_t limit = static_cast<std::size_t>(std::max(cap, 0)) * kBytesPerToken;
  if (text.size() <= limit) return {std::move(text), false};
  std::size_t cut = limit;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  text.resize(cut);
  return {std::move(text), true};
}

// ---- mock backend ------------------------------------------------------------

using FixtureMap = std::map<std::string, std::string>;  // prompt hash -> completion

inline FixtureMap load_fixtures(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::DatasetMissing, "cannot open fixtures " + path.string());
  try {
    return nlohmann::json::parse(in).get<FixtureMap>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, path.string() + ": " + e.what());
  }
}

namespace synth {

inline std::string line_after(std::string_view text, std::string_view label) {
  const auto at = text.find(label);
  if (at == std::string_view::npos) return {};
  const auto start = at + label.size();
  const auto end = text.find('\n', start);
  return std::string(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
}

inline std::string plural(const std::string& label, int n) {
  if (n == 1) return (std::string("aeiou").find(label[0]) != std::string::npos ? "an " : "a ") + label;
  if (label == "person") return std::to_string(n) + " people";
  if (label.back() == 's' || label.back() == 'h') return std::to_string(n) + " " + label + "es";
  return std::to_string(n) + " " + label + "s";
}

/// Stand-in for the description agent: restates the caption and the confident
/// detections in full sentences.
inline std::string describe(const PromptText& prompt) {
  const std::string caption = line_after(prompt.instruction, "Caption: ");
  const std::string objects = line_after(prompt.instruction, "Detected objects: ");
  const std::string telemetry = line_after(prompt.instruction, "Telemetry: ");

  std::vector<std::pair<std::string, int>> counts;
  std::size_t pos = 0;
  while (pos < objects.size() && objects != "none") {
    const auto open = objects.find(" (", pos);
    const auto close = objects.find(')', open);
    if (open == std::string::npos || close == std::string::npos) break;
    const std::string label = objects.substr(pos, open - pos);
    const double conf = std::strtod(objects.c_str() + open + 2, nullptr);
    if (conf >= 0.5) {
      auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == label; });
      if (it == counts.end()) counts.emplace_back(label, 1);
      else ++it->second;
    }
    pos = close + 1;
    while (pos < objects.size() && (objects[pos] == ',' || objects[pos] == ' ')) ++pos;
  }

  std::string out = "The image depicts " + (caption.empty() ? std::string("an outdoor scene") : caption) + ".";
  if (!counts.empty()) {
    out += " There ";
    out += counts.front().second == 1 ? "is " : "are ";
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (i > 0) out += i + 1 == counts.size() ? " and " : ", ";
      out += plural(counts[i].first, counts[i].second);
    }
    out += " in view.";
  }
  const std::string alt = line_after(telemetry, "altitude ");
  if (!alt.empty()) out += " The view is captured from an altitude of " + alt.substr(0, alt.find(" m")) + " m.";
  return out;
}

inline std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::string pick_color(const std::string& text, std::initializer_list<std::pair<const char*, const char*>> table,
                              const char* fallback) {
  for (const auto& [word, color] : table)
    if (text.find(word) != std::string::npos) return color;
  return fallback;
}

inline std::string coord(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%+.1f", v);
  return buf;
}

/// Stand-in for the code generation agent. Every output has the same element
/// structure and fixed-width values, so its canonical size never changes.
inline std::string scene_for(const std::string& description) {
  const std::string text = lowercase(description);
  const std::string sky = pick_color(text, {{"snow", "#DDE6F0"}, {"night", "#101830"}, {"cloud", "#B0B8C0"}},
                                     "#87CEEB");
  const std::string ground = pick_color(text,
                                        {{"snow", "#FFFFFF"},
                                         {"beach", "#C2B280"},
                                         {"pebble", "#A9A9A9"},
                                         {"lake", "#3A6EA5"},
                                         {"river", "#3A6EA5"},
                                         {"street", "#696969"},
                                         {"bridge", "#696969"},
                                         {"ruin", "#8B7355"}},
                                        "#4F7942");
  const std::string building =
      pick_color(text, {{"red", "#B22222"}, {"golden", "#D4AF37"}, {"brick", "#A0522D"}, {"white", "#F5F5F5"}},
                 "#808080");
  const std::string detail = pick_color(text, {{"snow", "#F0F8FF"}, {"tree", "#2E8B57"}, {"water", "#1E90FF"}},
                                        "#228B22");

  const std::uint64_t h = fnv1a64(description);
  auto x = [&](int shift) { return coord(static_cast<double>(static_cast<int>((h >> shift) % 161) - 80) / 10.0); };
  auto z = [&](int shift) { return coord(-2.0 - static_cast<double>((h >> shift) % 70) / 10.0); };

  std::string s = "```html\n<a-scene>\n";
  s += "  <a-sky color=\"" + sky + "\"></a-sky>\n";
  s += "  <a-plane rotation=\"-90 0 0\" width=\"60\" height=\"60\" color=\"" + ground + "\"></a-plane>\n";
  s += "  <a-box position=\"" + x(0) + " 1.5 " + z(8) + "\" width=\"4\" height=\"3\" depth=\"3\" color=\"" +
       building + "\"></a-box>\n";
  s += "  <a-cone position=\"" + x(16) + " 1.2 " + z(24) + "\" radius-bottom=\"0.8\" height=\"2.4\" color=\"" +
       detail + "\"></a-cone>\n";
  s += "  <a-cylinder position=\"" + x(32) + " 0.9 " + z(40) + "\" radius=\"0.3\" height=\"1.8\" color=\"" +
       building + "\" animation=\"property: rotation; to: 0 360 0; loop: true; dur: 6000\"></a-cylinder>\n";
  s += "</a-scene>\n```";
  return s;
}

inline std::string quoted_description(std::string_view instruction) {
  const auto start = instruction.find(kCodegenTaskPrefix);
  if (start == std::string_view::npos) return std::string(instruction);
  const auto from = start + kCodegenTaskPrefix.size();
  const auto feedback = instruction.find("\n\nYour previous answers", from);
  const auto end = instruction.substr(0, feedback).rfind("'.");
  if (end == std::string_view::npos || end < from) return std::string(instruction.substr(from));
  return std::string(instruction.substr(from, end - from));
}

inline std::string color_name(std::string hex) {
  for (auto& c : hex) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  static const std::map<std::string, std::string> names = {
      {"#87CEEB", "light blue"}, {"#DDE6F0", "pale grey"},  {"#101830", "dark blue"},  {"#B0B8C0", "grey"},
      {"#FFFFFF", "white"},      {"#C2B280", "sandy"},      {"#A9A9A9", "grey"},       {"#3A6EA5", "blue"},
      {"#696969", "dark grey"},  {"#8B7355", "brown"},      {"#4F7942", "green"},      {"#B22222", "red"},
      {"#D4AF37", "golden"},     {"#A0522D", "brick red"},  {"#F5F5F5", "white"},      {"#808080", "grey"},
      {"#F0F8FF", "snowy white"}, {"#2E8B57", "green"},     {"#1E90FF", "blue"},       {"#228B22", "green"},
      {"#FF0000", "red"},        {"#00FF00", "green"},      {"#0000FF", "blue"},       {"#000000", "black"},
      {"#FFFF00", "yellow"},     {"#FFA500", "orange"},     {"#8B4513", "brown"}};
  auto it = names.find(hex);
  return it == names.end() ? std::string() : it->second;
}

inline std::string shape_name(std::string_view tag) {
  if (tag == "a-plane") return "ground plane";
  if (tag.substr(0, 2) == "a-") tag.remove_prefix(2);
  return std::string(tag);
}

/// Stand-in for the reviewer that captions a rendered scene: reads the markup
/// back and names what is in it. Unreadable markup yields no text.
inline std::string describe_scene(std::string_view instruction) {
  auto body = instruction.substr(kSceneMarkupLabel.size());
  if (const auto end = body.rfind(kSceneReviewTask); end != std::string_view::npos) body = body.substr(0, end);
  scene::SceneGraph graph;
  try {
    graph = scene::parse_scene_markup(body);
  } catch (const Error&) {
    return {};
  }
  std::string sky;
  std::vector<std::string> things;
  std::vector<const scene::SceneNode*> stack;
  for (auto it = graph.roots.rbegin(); it != graph.roots.rend(); ++it) stack.push_back(&*it);
  while (!stack.empty()) {
    const auto* n = stack.back();
    stack.pop_back();
    const auto* color = n->attribute("color");
    const std::string hue = color ? color_name(*color) : std::string();
    if (n->tag == "a-sky") {
      sky = hue.empty() ? "a sky" : "a " + hue + " sky";
    } else if (n->tag != "a-scene" && n->tag != "a-entity") {
      std::string item = n->animated() ? "moving " : "";
      if (!hue.empty()) item += hue + " ";
      item += shape_name(n->tag);
      things.push_back((std::string("aeiou").find(item[0]) != std::string::npos ? "an " : "a ") + item);
    }
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(&*it);
  }
  if (sky.empty() && things.empty()) return {};
  std::string out = "The image depicts a scene";
  if (!sky.empty()) out += " under " + sky;
  if (!things.empty()) {
    out += " with ";
    for (std::size_t i = 0; i < things.size(); ++i) {
      if (i > 0) out += i + 1 == things.size() ? " and " : ", ";
      out += things[i];
    }
  }
  return out + ".";
}

}  // namespace synth

struct MockOptions {
  std::string model_id = "mock";
  AgentId role = AgentId::Describer;
  int token_cap = kDefaultDescriberTokenCap;
  Micros injected_latency{0};
  FixtureMap fixtures;
  bool unavailable = false;  // simulates a dead endpoint
};

/// Deterministic backend: fixture lookup by prompt hash, otherwise a
/// role-specific synthesizer. Injected latency advances a ManualClock when one
/// is attached and sleeps otherwise.
class MockBackend final : public CompletionBackend {
 public:
  explicit MockBackend(MockOptions options, ManualClock* clock = nullptr)
      : options_(std::move(options)), clock_(clock) {}

  std::string model_id() const override { return options_.model_id; }
  int token_cap() const override { return options_.token_cap; }
  BackendMode mode() const override { return BackendMode::Mock; }

  Completion complete(const PromptText& prompt) override {
    if (options_.unavailable) throw Error(Errc::BackendUnavailable, options_.model_id + ": endpoint unreachable");
    if (options_.injected_latency.count() > 0) {
      if (clock_) clock_->advance(options_.injected_latency);
      else std::this_thread::sleep_for(options_.injected_latency);
    }
    std::string text;
    if (auto it = options_.fixtures.find(prompt.hash()); it != options_.fixtures.end()) {
      text = it->second;
    } else if (options_.role == AgentId::Describer) {
      text = prompt.instruction.rfind(kSceneMarkupLabel, 0) == 0 ? synth::describe_scene(prompt.instruction)
                                                                  : synth::describe(prompt);
    } else {
      text = synth::scene_for(synth::quoted_description(prompt.instruction));
    }
    return apply_token_cap(std::move(text), options_.token_cap);
  }

  const MockOptions& options() const { return options_; }

 private:
  MockOptions options_;
  ManualClock* clock_;
};

// ---- remote backend ------------------------------------------------------------

struct RemoteOptions {
  std::string url;    // chat-completions style endpoint
  std::string model_id;
  int token_cap = kDefaultDescriberTokenCap;
  std::chrono::milliseconds timeout{60'000};
  std::string token_env = "SEMCAST_LLM_TOKEN";
};

inline nlohmann::json chat_request(const PromptText& prompt, const std::string& model, int max_tokens) {
  nlohmann::json messages = nlohmann::json::array();
  if (!prompt.system.empty()) messages.push_back({{"role", "system"}, {"content", prompt.system}});
  for (const auto& t : prompt.memory_turns) {
    messages.push_back({{"role", "user"}, {"content", t.prompt}});
    messages.push_back({{"role", "assistant"}, {"content", t.response}});
  }
  messages.push_back({{"role", "user"}, {"content", prompt.instruction}});
  return {{"model", model}, {"messages", std::move(messages)}, {"max_tokens", max_tokens}};
}

class RemoteBackend final : public CompletionBackend {
 public:
  explicit RemoteBackend(RemoteOptions options) : options_(std::move(options)) {}

  std::string model_id() const override { return options_.model_id; }
  int token_cap() const override { return options_.token_cap; }
  BackendMode mode() const override { return BackendMode::Remote; }

  Completion complete(const PromptText& prompt) override {
    const char* token = options_.token_env.empty() ? nullptr : std::getenv(options_.token_env.c_str());
    const std::string body = http::post_json(options_.url, chat_request(prompt, options_.model_id, options_.token_cap).dump(),
                                             options_.timeout, Errc::BackendUnavailable, token ? token : "");
    try {
      const auto doc = nlohmann::json::parse(body);
      std::string text = doc.contains("choices") ? doc.at("choices").at(0).at("message").at("content").get<std::string>()
                                                 : doc.at("completion").get<std::string>();
      return apply_token_cap(std::move(text), options_.token_cap);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::BackendUnavailable, options_.url + ": unexpected response: " + e.what());
    }
  }

 private:
  RemoteOptions options_;
};

}  // namespace semcast::agents
