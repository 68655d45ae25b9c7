#include "hgmem/consolidation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hgmem/errors.hpp"

namespace hgmem {

namespace {

template <class Fn>
auto with_one_retry(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ProviderError&) {
  } catch (const ParseError&) {
  }
  try {
    return fn();
  } catch (const ProviderError& e) {
    throw ConsolidationAborted(std::string(stage) + " failed after retry: " + e.what());
  } catch (const ParseError& e) {
    throw ConsolidationAborted(std::string(stage) + " returned malformed output after retry: " + e.what());
  }
}

ScoredRelation score_candidate(TopicId id, std::string_view first, std::string_view second,
                               RelationScorer& scorer) {
  ScoredRelation out{id, Relation::unrelated, 0.0, false};
  try {
    RelationScore s;
    try {
      s = scorer.score(first, second);
    } catch (const ProviderError&) {
      s = scorer.score(first, second);
    }
    if (std::isfinite(s.weight)) {
      out.relation = s.relation;
      out.weight = std::clamp(s.weight, 0.0, 1.0);
    }
  } catch (const ParseError&) {
    out.malformed = true;
  }
  return out;
}

}  // namespace

std::vector<ScoredTopic> select_candidates(const TopicGraph& topics, std::span<const double> embedding,
                                           std::size_t k_cand) {
  return topics.index().topk(embedding, k_cand);
}

RelationScore score_relation(std::string_view first_summary, std::string_view second_summary,
                             RelationScorer& scorer) {
  if (first_summary.empty() || second_summary.empty()) {
    throw ValidationError("score_relation: summaries must be non-empty");
  }
  const auto s = score_candidate(TopicId{}, first_summary, second_summary, scorer);
  return {s.relation, s.weight};
}

ConsolidationResult consolidate_segment(const MemorySnapshot& snapshot, std::size_t segment_length,
                                        const ProviderBundle& providers, bool forced) {
  providers.require_complete();
  if (snapshot.state() != EngineState::EpisodicBuffering) {
    throw StateError("consolidate_segment: snapshot is not in EpisodicBuffering");
  }
  const auto& buffer = snapshot.active_buffer().nodes();
  if (segment_length == 0 || segment_length > buffer.size()) {
    throw StateError("consolidate_segment: segment of " + std::to_string(segment_length) +
                     " events from a buffer of " + std::to_string(buffer.size()));
  }
  const auto& config = snapshot.config();
  const auto log_start = providers.call_log->size();
  const std::span<const EventNode> segment(buffer.data(), segment_length);
  const std::string raw = render_raw(segment);

  ConsolidationReport report;
  report.segment_length = segment_length;
  report.forced = forced;

  const Summary summary = with_one_retry("summarizer", [&] {
    auto s = providers.summarizer->summarize(raw);
    if (s.summary.empty()) throw ParseError("empty summary");
    return s;
  });
  const std::vector<double> embedding = with_one_retry("embedder", [&] {
    auto v = providers.embedder->embed(summary.summary);
    if (static_cast<std::int64_t>(v.size()) != config.embedding_dim) {
      throw ParseError("embedding dimension " + std::to_string(v.size()));
    }
    if (std::abs(l2_norm(v) - 1.0) > 1e-6) throw ParseError("embedding is not unit norm");
    return v;
  });

  auto flags = std::make_unique<bool[]>(segment_length);
  for (std::size_t i = 0; i < segment_length; ++i) {
    flags[i] = with_one_retry("consistency check",
                              [&] { return providers.summarizer->entails(summary.summary, segment[i].text); });
  }

  const auto& topics = snapshot.topic_graph();
  report.candidate_pool = select_candidates(topics, embedding, static_cast<std::size_t>(config.k_cand));

  const TopicId new_id = snapshot.next_topic_id();
  std::vector<TopicEdge> edges;
  for (const auto& candidate : report.candidate_pool) {
    const auto* node = topics.find(candidate.id);
    ScoredRelation scored;
    try {
      scored = score_candidate(candidate.id, summary.summary, node->summary, *providers.relation_scorer);
    } catch (const ProviderError&) {
      report.skipped_candidates.push_back(candidate.id);
      report.degraded = true;
      continue;
    }
    if (scored.malformed) report.degraded = true;
    report.scored_relations.push_back(scored);
    if (scored.relation != Relation::unrelated && scored.weight > config.tau) {
      edges.push_back(TopicEdge{new_id, candidate.id, scored.relation, scored.weight,
                                is_directed(scored.relation)});
    }
  }
  report.accepted_edges = edges.size();

  // Commit on a copy; the caller's snapshot stays untouched until assignment.
  MemorySnapshot working = snapshot;
  working.begin_consolidation();
  report.archive_id = working.archive_prefix(segment_length, {flags.get(), segment_length});

  TopicNode node;
  node.id = new_id;
  node.summary = summary.summary;
  node.keywords = summary.keywords;
  node.raw = raw;
  node.embedding = embedding;
  node.created_at = working.logical_clock();
  node.source_archive_id = report.archive_id;
  working.insert_topic_node(std::move(node), std::move(edges));
  working.end_consolidation();
  report.new_topic_id = new_id;

  for (const auto& r : providers.call_log->entries_since(log_start)) {
    report.elapsed += r.elapsed;
    report.provider_tokens.input += r.input_tokens;
    report.provider_tokens.output += r.output_tokens;
    if (r.provider == provider_name::relation_scorer) ++report.relation_calls;
  }
  return {std::move(report), std::move(working)};
}

}  // namespace hgmem
