#pragma once

#include "semcast/agents/backend.hpp"
#include "semcast/agents/pipeline.hpp"
#include "semcast/bench/metrics.hpp"
#include "semcast/hash.hpp"
#include "semcast/http.hpp"
#include "semcast/scene/markup.hpp"
#include "semcast/transport/metering.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace semcast::bench {

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string backend_id() const = 0;
  virtual std::vector<double> embed(std::string_view text) = 0;
};

/// Deterministic bag-of-words embedding: every lower-cased word maps to a
/// fixed pseudo-random direction seeded by its hash. Shared vocabulary raises
/// the score; nothing else about meaning is captured.
class HashedEmbedding final : public EmbeddingBackend {
 public:
  explicit HashedEmbedding(std::size_t dimensions = 256) : dims_(dimensions) {}

  std::string backend_id() const override { return "hashed-bow-" + std::to_string(dims_); }

  std::vector<double> embed(std::string_view text) override {
    std::vector<double> v(dims_, 0.0);
    std::string word;
    auto flush = [&] {
      if (word.empty()) return;
      std::uint64_t state = fnv1a64(word);
      for (auto& x : v) x += unit(next(state));
      word.clear();
    };
    for (char c : text) {
      if (std::isalnum(static_cast<unsigned char>(c))) word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      else flush();
    }
    flush();
    return v;
  }

 private:
  static std::uint64_t next(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  static double unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-52 - 1.0; }

  std::size_t dims_;
};

struct RemoteEmbeddingOptions {
  std::string url;  // embeddings endpoint
  std::string model = "all-MiniLM-L6-v2";
  std::chrono::milliseconds timeout{30'000};
  std::string token_env = "SEMCAST_EMBED_TOKEN";
};

/// Sentence-embedding service. Accepts OpenAI-style {"data":[{"embedding":[]}]}
/// or a bare {"embedding":[]} reply.
class RemoteEmbedding final : public EmbeddingBackend {
 public:
  explicit RemoteEmbedding(RemoteEmbeddingOptions options) : options_(std::move(options)) {}

  std::string backend_id() const override { return "remote:" + options_.model; }

  std::vector<double> embed(std::string_view text) override {
    const nlohmann::json request = {{"model", options_.model}, {"input", nlohmann::json::array({std::string(text)})}};
    const char* token = options_.token_env.empty() ? nullptr : std::getenv(options_.token_env.c_str());
    const std::string body =
        http::post_json(options_.url, request.dump(), options_.timeout, Errc::BackendUnavailable, token ? token : "");
    try {
      const auto doc = nlohmann::json::parse(body);
      const auto& vec = doc.contains("data") ? doc.at("data").at(0).at("embedding") : doc.at("embedding");
      auto out = vec.get<std::vector<double>>();
      if (out.empty()) throw Error(Errc::BackendUnavailable, options_.url + ": empty embedding");
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::BackendUnavailable, options_.url + ": unexpected response: " + e.what());
    }
  }

 private:
  RemoteEmbeddingOptions options_;
};

struct SimilarityScore {
  double value = 0.0;
  std::string backend_id;
  std::string text_a_hash;
  std::string text_b_hash;
};

/// Cosine similarity; negative cosines count as unrelated (0).
inline double clamped_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(Errc::BackendUnavailable, "embedding dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

inline SimilarityScore semantic_similarity(std::string_view a, std::string_view b, EmbeddingBackend& backend) {
  if (agents::blank(a) || agents::blank(b)) throw Error(Errc::EmptyText, "similarity needs two non-empty texts");
  const double v = clamped_cosine(backend.embed(a), backend.embed(b));
  return {v, backend.backend_id(), sha256_hex(a), sha256_hex(b)};
}

/// Captions the scene with the describer, then scores that caption against the
/// reference. Pixel metrics are deliberately not used.
inline SimilarityScore frame_fidelity_eval(const scene::SceneGraph& graph, std::string_view reference_caption,
                                           agents::CompletionBackend& describer, EmbeddingBackend& embed) {
  if (graph.empty()) throw Error(Errc::EmptyText, "empty scene has nothing to describe");
  const auto completion = describer.complete(agents::build_scene_review_prompt(scene::serialize_scene(graph)));
  return semantic_similarity(completion.text, reference_caption, embed);
}

inline RDPoint rd_point(const transport::BitrateStats& rate, const SimilarityScore& fidelity,
                        std::optional<double> lambda_weight = std::nullopt) {
  return {rate.mean_bps, 1.0 - fidelity.value, lambda_weight};
}

}  // namespace semcast::bench
