#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hgmem/providers.hpp"
#include "hgmem/snapshot.hpp"

namespace hgmem {

struct Query {
  std::string text;
  std::optional<std::string> asked_at;
  std::vector<std::string> target_speakers;
  std::optional<bool> time_sensitive;
};

/// {text, asked_at?, target_speakers?, time_sensitive?}; empty text rejected.
Query query_from_json(const nlohmann::json& j);

struct AnchorSet {
  std::vector<ScoredTopic> seeds;     // top-k by cosine, best first
  std::vector<TopicId> expansions;    // one-hop neighbours not already seeds, ascending

  /// Seeds and expansions, ascending id.
  std::vector<TopicId> ids() const;
};

/// Top-k topic nodes by cosine plus their first-order neighbours, edge
/// direction ignored.
AnchorSet anchor(const TopicGraph& topics, std::span<const double> query_embedding, std::size_t k);

/// An event node reachable from the anchors. Live buffer nodes carry no
/// archive and no anchor.
struct Candidate {
  EventNode node;
  std::optional<ArchiveId> source_archive_id;
  std::optional<TopicId> anchor_topic_id;
};

/// Event nodes of every archive cross-linked from an anchor, deduplicated,
/// ascending event id. With `include_live`, the active buffer follows.
std::vector<Candidate> drill_down(const MemorySnapshot& snapshot, const AnchorSet& anchors,
                                  bool include_live = true);

struct Indicators {
  int time = 0;
  int conf = 0;
  int role = 0;

  bool operator==(const Indicators&) const = default;
};

struct RankedCandidate {
  EventId event_node_id;
  std::optional<ArchiveId> source_archive_id;
  std::optional<TopicId> anchor_topic_id;
  double p_sem = 0.0;
  Indicators indicators;
  double score = 0.0;
  std::size_t rank = 0;
  std::string session_id;
  std::uint64_t turn_index = 0;
  std::string speaker;
  std::string text;
};

/// Scoring input for the pure ranking step.
struct ScoringInput {
  EventId id;
  double p_sem = 0.0;
  Indicators indicators;
};

/// p_sem · β_time^I_time · β_conf^I_conf · β_role^I_role.
double modulated_score(double p_sem, const Indicators& ind, const EngineConfig& config);

/// Indices of `inputs` in rank order: score descending, then more recent
/// event (larger id), then smaller id.
std::vector<std::size_t> rank_order(std::span<const ScoringInput> inputs, const EngineConfig& config);

/// Month or weekday names, relative phrases, 4-digit years, hh:mm or dd/mm.
bool has_temporal_expression(std::string_view text);

/// Explicit override, else the classifier if present, else the temporal
/// regex extended with question forms such as "when" or "what year".
bool query_is_time_sensitive(const Query& query, TemporalClassifier* classifier);

int time_indicator(bool query_time_sensitive, const EventNode& candidate);
int role_indicator(const Query& query, const EventNode& candidate);
int conf_indicator(const EventNode& candidate);

struct RerankResult {
  std::vector<RankedCandidate> ranked;
  bool degraded = false;  // relevance provider failed; cosine stood in for p_sem
};

/// Scores every candidate and returns the top `k` (retrieval_k if 0).
RerankResult rerank(const Query& query, std::span<const Candidate> candidates,
                    const ProviderBundle& providers, const EngineConfig& config, std::size_t k = 0);

struct RetrievalResult {
  AnchorSet anchors;
  std::size_t candidate_count = 0;
  std::vector<RankedCandidate> ranked;
  bool degraded = false;
};

/// Anchor, drill down, rerank. Read-only on `snapshot`.
RetrievalResult retrieve(const MemorySnapshot& snapshot, const Query& query,
                         const ProviderBundle& providers, std::size_t k = 0);

nlohmann::json to_json(const RankedCandidate& c);

}  // namespace hgmem
