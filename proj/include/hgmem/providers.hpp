#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hgmem/event_graph.hpp"
#include "hgmem/topic_graph.hpp"

namespace hgmem {

/// Provider roles, as they appear in the call log.
namespace provider_name {
inline constexpr std::string_view embedder = "embedder";
inline constexpr std::string_view discriminator = "discriminator";
inline constexpr std::string_view summarizer = "summarizer";
inline constexpr std::string_view consistency = "consistency";
inline constexpr std::string_view relation_scorer = "relation_scorer";
inline constexpr std::string_view relevance_scorer = "relevance_scorer";
inline constexpr std::string_view temporal_classifier = "temporal_classifier";
inline constexpr std::string_view answerer = "answerer";
}  // namespace provider_name

struct CallRecord {
  std::string provider;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  std::chrono::microseconds elapsed{0};

  bool operator==(const CallRecord&) const = default;
};

/// Append-only, thread-safe record of every provider invocation.
class CallLog {
 public:
  void append(CallRecord record);
  std::size_t size() const;
  std::vector<CallRecord> entries() const;
  std::vector<CallRecord> entries_since(std::size_t position) const;
  std::size_t count(std::string_view provider, std::size_t since = 0) const;

 private:
  mutable std::mutex mutex_;
  std::vector<CallRecord> records_;
};

struct UsageSummary {
  double tokens_per_query = 0.0;
  double mean_latency_seconds = 0.0;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  std::size_t calls = 0;

  bool operator==(const UsageSummary&) const = default;
};

/// Folds a span of call records into per-query token and latency figures.
/// Zero queries yields zeros.
UsageSummary record_usage(std::span<const CallRecord> records, std::size_t query_count);

struct Summary {
  std::vector<std::string> keywords;
  std::string summary;
};

struct RelationScore {
  Relation relation = Relation::unrelated;
  double weight = 0.0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  /// Unit-norm vector of dimension().
  virtual std::vector<double> embed(std::string_view text) = 0;
};

/// Topic-change discriminator. Returns raw boundary indices (a boundary at
/// i means a change between utterance i and i+1). Throws ProviderError on
/// transport failure and ParseError on malformed output.
class BoundaryDiscriminator {
 public:
  virtual ~BoundaryDiscriminator() = default;
  virtual std::vector<std::int64_t> detect(std::span<const EventNode> buffer) = 0;
};

class Summarizer {
 public:
  virtual ~Summarizer() = default;
  virtual Summary summarize(std::string_view content) = 0;
  /// Self-consistency check: does `summary` entail `utterance`?
  virtual bool entails(std::string_view summary, std::string_view utterance) = 0;
};

class RelationScorer {
 public:
  virtual ~RelationScorer() = default;
  /// `first` is the new memory, `second` the existing candidate.
  virtual RelationScore score(std::string_view first, std::string_view second) = 0;
};

/// Pairwise relevance p_sem(candidate | query) in [0, 1].
class RelevanceScorer {
 public:
  virtual ~RelevanceScorer() = default;
  virtual double relevance(std::string_view query, std::string_view candidate) = 0;
};

/// Optional: classifies a query as time-sensitive.
class TemporalClassifier {
 public:
  virtual ~TemporalClassifier() = default;
  virtual bool time_sensitive(std::string_view query) = 0;
};

/// Optional answer synthesis from retrieved context, for QA evaluation.
class Answerer {
 public:
  virtual ~Answerer() = default;
  virtual std::string answer(std::string_view question, std::span<const std::string> context) = 0;
};

struct ProviderBundle {
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<BoundaryDiscriminator> discriminator;
  std::shared_ptr<Summarizer> summarizer;
  std::shared_ptr<RelationScorer> relation_scorer;
  std::shared_ptr<RelevanceScorer> relevance_scorer;
  std::shared_ptr<TemporalClassifier> temporal_classifier;  // may be null
  std::shared_ptr<Answerer> answerer;                       // may be null
  std::shared_ptr<CallLog> call_log;

  /// Throws ValidationError if a required provider is missing.
  void require_complete() const;
};

/// Linearised buffer lines "<index>. <speaker>: <text>".
std::string linearize_buffer(std::span<const EventNode> buffer);

}  // namespace hgmem
