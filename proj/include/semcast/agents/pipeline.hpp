#pragma once

#include "semcast/agents/backend.hpp"
#include "semcast/agents/prompt.hpp"
#include "semcast/clock.hpp"
#include "semcast/scene/constraints.hpp"
#include "semcast/scene/markup.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace semcast::agents {

inline constexpr int kDefaultRetryBudget = 3;

/// Thread-safe append-only log of agent exchanges. Sequence numbers give the
/// total order of concurrent appends.
class ExchangeStore {
 public:
  std::size_t append(ExchangeRecord record) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(record));
    return records_.size() - 1;
  }

  std::vector<ExchangeRecord> snapshot() const {
    std::lock_guard lock(mutex_);
    return records_;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::vector<ExchangeRecord> records_;
};

inline SteadyClock& default_clock() {
  static SteadyClock clock;
  return clock;
}

inline bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string clip_utf8(std::string s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return s;
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  s.resize(cut);
  return s;
}

struct FusionOptions {
  std::size_t max_description_bytes = kDefaultDescriptionMaxBytes;
};

/// Description agent call. Memory and store are only touched after a
/// successful completion.
inline SceneDescription fuse_description(const uplink::AnnotationPacket& packet, CompletionBackend& backend,
                                         AgentMemory& memory, ExchangeStore* store = nullptr,
                                         const Clock& clock = default_clock(), FusionOptions options = {}) {
  const PromptText prompt = build_fusion_prompt(packet, memory);
  const Micros start = clock.now();
  Completion completion = backend.complete(prompt);
  const Micros latency = clock.now() - start;
  if (blank(completion.text)) throw Error(Errc::EmptyCompletion, backend.model_id() + " returned no text");

  SceneDescription desc{clip_utf8(trim(completion.text), options.max_description_bytes), packet_id(packet),
                        backend.model_id(), clock.now()};
  memory.remember({prompt.instruction, desc.text});
  if (store) store->append({AgentId::Describer, prompt, completion.text, latency, std::nullopt, 1});
  return desc;
}

struct CodegenResult {
  scene::SceneGraph graph;
  std::string code;  // canonical serialization
  scene::ValidationReport report;
  ExchangeRecord record;
};

/// Raised when every attempt failed; carries the last attempt's report.
class CodegenError : public Error {
 public:
  CodegenError(Errc code, const std::string& detail, scene::ValidationReport report, int attempts)
      : Error(code, detail), report_(std::move(report)), attempts_(attempts) {}
  const scene::ValidationReport& report() const { return report_; }
  int attempts() const { return attempts_; }

 private:
  scene::ValidationReport report_;
  int attempts_;
};

/// Code generation agent call with up to `retries` attempts. Each retry's
/// prompt lists every violation seen so far. Never returns a failing graph.
inline CodegenResult generate_scene_code(const SceneDescription& desc, CompletionBackend& backend,
                                         const scene::ConstraintProfile& profile, ExchangeStore* store = nullptr,
                                         const Clock& clock = default_clock(), int retries = kDefaultRetryBudget) {
  const PromptText base = build_codegen_prompt(desc);
  std::vector<scene::Violation> history;
  Micros total{0};
  PromptText prompt = base;
  std::string last_completion;
  scene::MarkupCheck check;

  for (int attempt = 1; attempt <= std::max(retries, 1); ++attempt) {
    prompt = with_feedback(base, history);
    const Micros start = clock.now();
    last_completion = backend.complete(prompt).text;
    total += clock.now() - start;
    check = scene::check_markup(last_completion, profile);
    if (check.report.passed()) {
      ExchangeRecord record{AgentId::Coder, prompt, last_completion, total, scene::Verdict::Pass, attempt};
      if (store) store->append(record);
      std::string code = scene::serialize_scene(*check.graph);
      return {std::move(*check.graph), std::move(code), std::move(check.report), std::move(record)};
    }
    history.insert(history.end(), check.report.violations.begin(), check.report.violations.end());
  }

  const int attempts = std::max(retries, 1);
  if (store) store->append({AgentId::Coder, prompt, last_completion, total, scene::Verdict::Fail, attempts});
  const bool parsed = check.graph.has_value();
  const std::string detail = std::to_string(attempts) + " attempts rejected; last: " +
                             check.report.violations.front().rule + " " + check.report.violations.front().message;
  throw CodegenError(parsed ? Errc::ValidationExhausted : Errc::ParseFailure, detail, std::move(check.report),
                     attempts);
}

// ---- fine-tuning export ----------------------------------------------------------

struct ExportFilter {
  bool include_describer = true;
  bool include_coder = true;
};

struct ExportSummary {
  std::size_t exported = 0;
  std::size_t dropped_failed = 0;
  std::size_t dropped_duplicates = 0;
  std::size_t dropped_by_filter = 0;
};

/// Writes JSON-lines {prompt, completion}. Failed code generations are
/// dropped first, then repeated prompts keep their first occurrence.
inline ExportSummary export_finetune_dataset(const std::vector<ExchangeRecord>& records,
                                             const std::filesystem::path& out_path, ExportFilter filter = {}) {
  if (records.empty()) throw Error(Errc::EmptyStore, "no exchanges to export");
  ExportSummary summary;
  std::set<std::string> seen;
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& r : records) {
    const bool wanted = r.agent == AgentId::Describer ? filter.include_describer : filter.include_coder;
    if (!wanted) {
      ++summary.dropped_by_filter;
      continue;
    }
    if (r.agent == AgentId::Coder && r.verdict != scene::Verdict::Pass) {
      ++summary.dropped_failed;
      continue;
    }
    std::string prompt = r.prompt.flatten();
    if (!seen.insert(prompt).second) {
      ++summary.dropped_duplicates;
      continue;
    }
    rows.emplace_back(std::move(prompt), r.completion);
  }
  if (rows.empty()) throw Error(Errc::EmptyAfterFilter, "every exchange was filtered out");

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::StorageFailure, "cannot write " + out_path.string());
  for (const auto& [prompt, completion] : rows) {
    out << nlohmann::json{{"completion", completion}, {"prompt", prompt}}.dump() << '\n';
  }
  if (!out) throw Error(Errc::StorageFailure, "write failed for " + out_path.string());
  summary.exported = rows.size();
  return summary;
}

}  // namespace semcast::agents
