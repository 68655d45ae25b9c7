#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hgmem/providers.hpp"
#include "hgmem/snapshot.hpp"

namespace hgmem {

struct ScoredRelation {
  TopicId topic_id;
  Relation relation = Relation::unrelated;
  double weight = 0.0;
  bool malformed = false;  // provider output unusable, counted as unrelated

  bool operator==(const ScoredRelation&) const = default;
};

struct TokenUsage {
  std::uint64_t input = 0;
  std::uint64_t output = 0;
};

struct ConsolidationReport {
  TopicId new_topic_id;
  ArchiveId archive_id;
  std::size_t segment_length = 0;
  std::vector<ScoredTopic> candidate_pool;
  std::vector<ScoredRelation> scored_relations;
  std::size_t accepted_edges = 0;
  /// Candidates whose relation scoring failed at the transport level.
  std::vector<TopicId> skipped_candidates;
  std::size_t relation_calls = 0;
  bool forced = false;
  bool degraded = false;
  /// Provider time spent inside the transaction, from the call log.
  std::chrono::microseconds elapsed{0};
  TokenUsage provider_tokens;
};

/// The K highest-cosine topic nodes for a unit-norm summary embedding,
/// similarity descending, ties by smaller id.
std::vector<ScoredTopic> select_candidates(const TopicGraph& topics, std::span<const double> embedding,
                                           std::size_t k_cand);

/// Relation between a new memory (first) and an existing one (second).
/// Malformed provider output is read as (unrelated, 0). A transport failure
/// is retried once, then propagates as ProviderError.
RelationScore score_relation(std::string_view first_summary, std::string_view second_summary,
                             RelationScorer& scorer);

struct ConsolidationResult {
  ConsolidationReport report;
  MemorySnapshot snapshot;
};

/// Consolidates the first `segment_length` buffered events into one topic
/// node: summarise, stamp self-consistency flags, link against the K_cand
/// nearest topics, archive the segment and cross-link it.
///
/// Transactional: on summariser, embedder or consistency failure (after one
/// retry) throws ConsolidationAborted and `snapshot` is untouched. A
/// relation-scoring failure that survives its retry skips that candidate
/// and marks the report degraded.
ConsolidationResult consolidate_segment(const MemorySnapshot& snapshot, std::size_t segment_length,
                                        const ProviderBundle& providers, bool forced = false);

}  // namespace hgmem
