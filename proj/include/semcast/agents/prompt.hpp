#pragma once

#include "semcast/clock.hpp"
#include "semcast/error.hpp"
#include "semcast/hash.hpp"
#include "semcast/json_writer.hpp"
#include "semcast/scene/constraints.hpp"
#include "semcast/uplink/packet.hpp"

#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace semcast::agents {

inline constexpr std::size_t kDefaultMemoryTurns = 8;
inline constexpr std::size_t kDefaultDescriptionMaxBytes = 2000;

struct Turn {
  std::string prompt;
  std::string response;
  bool operator==(const Turn&) const = default;
};

struct PromptText {
  std::string system;
  std::string instruction;
  std::vector<Turn> memory_turns;
  bool operator==(const PromptText&) const = default;

  /// Flattened form used for hashing, fixture lookup and dataset export.
  std::string flatten() const {
    std::string out = system;
    for (const auto& t : memory_turns) {
      out += "\n\n[user]\n" + t.prompt;
      out += "\n\n[assistant]\n" + t.response;
    }
    out += "\n\n[user]\n" + instruction;
    return out;
  }

  std::string hash() const { return sha256_hex(flatten()); }
};

struct SceneDescription {
  std::string text;
  std::string source_packet_id;
  std::string agent1_model_id;
  Micros created_at{0};
};

enum class AgentId { Describer = 1, Coder = 2 };

struct ExchangeRecord {
  AgentId agent = AgentId::Describer;
  PromptText prompt;
  std::string completion;
  Micros latency{0};
  std::optional<scene::Verdict> verdict;  // code generation only
  int attempts = 1;
};

inline std::string packet_id(const uplink::AnnotationPacket& p) {
  return p.frame.source_id + "#" + std::to_string(p.frame.frame_index);
}

/// Per-stream in-context memory for the description agent: the K most recent
/// (prompt, response) turns, oldest evicted first.
class AgentMemory {
 public:
  explicit AgentMemory(std::size_t capacity = kDefaultMemoryTurns) : capacity_(capacity) {}

  void remember(Turn turn) {
    if (capacity_ == 0) return;
    turns_.push_back(std::move(turn));
    while (turns_.size() > capacity_) turns_.pop_front();
  }

  std::vector<Turn> recent(std::size_t k) const {
    const std::size_t n = std::min(k, turns_.size());
    return {turns_.end() - static_cast<std::ptrdiff_t>(n), turns_.end()};
  }

  std::size_t size() const { return turns_.size(); }
  std::size_t capacity() const { return capacity_; }

  std::string hash() const {
    Sha256 h;
    for (const auto& t : turns_) {
      h.update(t.prompt);
      h.update(std::string_view("\0", 1));
      h.update(t.response);
      h.update(std::string_view("\x1e", 1));
    }
    return h.hex();
  }

 private:
  std::size_t capacity_;
  std::deque<Turn> turns_;
};

// ---- description agent -------------------------------------------------------

// Describer system prompt; only the coder's template is fixed by the dialect rules.
inline constexpr std::string_view kFusionSystemPrompt =
    "You describe scenes captured by a drone camera. You receive an automatic image caption, a list of detected "
    "objects with confidences, and the drone's flight telemetry. Fuse them into one detailed description of what "
    "the image shows, suitable for rebuilding the scene in 3D. Mention only objects that are supported by the "
    "caption or detections. Answer with the description only.";

inline std::string telemetry_summary(const uplink::TelemetryPacket& t) {
  return "altitude " + format_fixed(t.altitude, uplink::kMeterDecimals) + " m, latitude " +
         format_fixed(t.latitude, uplink::kDegreeDecimals) + ", longitude " +
         format_fixed(t.longitude, uplink::kDegreeDecimals) + ", ground speed " +
         format_fixed(t.ground_speed, uplink::kSpeedDecimals) + " m/s";
}

inline std::string detection_summary(const uplink::DetectionSet& set) {
  if (set.empty()) return "none";
  std::string out;
  for (const auto& d : set) {
    if (!out.empty()) out += ", ";
    out += d.label + " (" + format_fixed(d.confidence, uplink::kConfidenceDecimals) + ")";
  }
  return out;
}

inline PromptText build_fusion_prompt(const uplink::AnnotationPacket& packet, const std::vector<Turn>& memory,
                                      std::size_t max_turns = kDefaultMemoryTurns) {
  PromptText p;
  p.system = std::string(kFusionSystemPrompt);
  const std::size_t keep = std::min(max_turns, memory.size());
  p.memory_turns.assign(memory.end() - static_cast<std::ptrdiff_t>(keep), memory.end());
  p.instruction = "Caption: " + packet.caption.text + "\nDetected objects: " + detection_summary(packet.detections) +
                  "\nTelemetry: " + telemetry_summary(packet.telemetry) +
                  "\nDescribe the image in detail, starting with \"The image depicts\".";
  return p;
}

inline PromptText build_fusion_prompt(const uplink::AnnotationPacket& packet, const AgentMemory& memory) {
  return build_fusion_prompt(packet, memory.recent(memory.capacity()), memory.capacity());
}

// ---- code generation agent ---------------------------------------------------

inline constexpr std::string_view kCodegenPreamble =
    "Generate A-Frame elements starting with 'a-' to accomplish the following instruction while meeting the "
    "conditions below.";

inline constexpr std::string_view kCodegenConditions[] = {
    "- Do not use a-assets or a-light.",
    "- Avoid using scripts.",
    "- Do not use GLTF, GLB models.",
    "- Do not use external model links.",
    "- Provide animation.",
    "- Use high-quality detailed models.",
    "- If animation setting is requested, use the animation component instead of the <a-animation> element.",
    "- If the background setting is requested, use the <a-sky> element instead of the background component.",
    "- Provide the result in one code block.",
};

inline constexpr std::string_view kCodegenTaskPrefix =
    "You are an assistant that teaches me Primitive Element tags for A-Frame version 1.4.0 and later. Create a '";

inline std::string codegen_template() {
  std::string out(kCodegenPreamble);
  out += "\n\nConditions:\n";
  for (auto c : kCodegenConditions) {
    out += c;
    out += '\n';
  }
  out += "\nInstruction:\n";
  out += kCodegenTaskPrefix;
  out += "{description}'.";
  return out;
}

inline PromptText build_codegen_prompt(const SceneDescription& desc) {
  if (desc.text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(Errc::EmptyDescription, "scene description is empty");
  }
  std::string body = codegen_template();
  body.replace(body.find("{description}"), 13, desc.text);
  return {"", std::move(body), {}};
}

/// Appends every earlier rejection so attempt i+1 sees all previous violations.
inline PromptText with_feedback(const PromptText& base, const std::vector<scene::Violation>& history) {
  PromptText p = base;
  if (history.empty()) return p;
  p.instruction += "\n\nYour previous answers were rejected for these reasons:";
  for (const auto& v : history) {
    p.instruction += "\n- [" + v.rule + "] " + v.message;
  }
  p.instruction += "\nReturn a corrected scene that meets every condition.";
  return p;
}

// ---- scene review (frame fidelity) ------------------------------------------------

inline constexpr std::string_view kSceneReviewSystemPrompt =
    "You are shown the source of a 3D web scene. Describe what a viewer of the rendered scene would see, as if "
    "it were a photograph. Mention the sky, the ground, the objects with their colors and anything that moves.";
inline constexpr std::string_view kSceneMarkupLabel = "Scene markup:\n";
inline constexpr std::string_view kSceneReviewTask = "\nDescribe the rendered view in detail, starting with \"The image depicts\".";

inline PromptText build_scene_review_prompt(std::string_view markup) {
  if (markup.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(Errc::EmptyDescription, "no scene markup to review");
  }
  std::string instruction(kSceneMarkupLabel);
  instruction += markup;
  instruction += kSceneReviewTask;
  return {std::string(kSceneReviewSystemPrompt), std::move(instruction), {}};
}

}  // namespace semcast::agents
