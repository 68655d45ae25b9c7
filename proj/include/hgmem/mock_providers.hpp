#pragma once

#include <cstdint>
#include <memory>

#include "hgmem/providers.hpp"

namespace hgmem::mock {

/// Deterministic latency charged by every mock call: a fixed overhead plus
/// a per-token cost. Keeps latency reports reproducible offline.
std::chrono::microseconds modelled_latency(std::uint64_t input_tokens, std::uint64_t output_tokens);

/// Hashed bag-of-words: lowercase, strip punctuation, each token adds ±1 to
/// one of `dim` buckets (bucket and sign from two seeded hashes), then L2
/// normalise. Text without tokens maps to the first basis vector.
class HashedEmbedder final : public Embedder {
 public:
  HashedEmbedder(std::size_t dim, std::uint64_t seed, std::shared_ptr<CallLog> log = nullptr);

  std::size_t dimension() const override { return dim_; }
  std::vector<double> embed(std::string_view text) override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  std::shared_ptr<CallLog> log_;
};

/// Keyword-set divergence. For every gap i, compares the content words of
/// the `window` utterances ending at i with those of the `window`
/// utterances starting at i+1; a gap with no shared content word is a
/// candidate boundary. Consecutive candidates collapse to the first.
class KeywordDiscriminator final : public BoundaryDiscriminator {
 public:
  explicit KeywordDiscriminator(std::shared_ptr<CallLog> log = nullptr, std::size_t window = 3)
      : log_(std::move(log)), window_(window) {}

  std::vector<std::int64_t> detect(std::span<const EventNode> buffer) override;

 private:
  std::shared_ptr<CallLog> log_;
  std::size_t window_;
};

/// Keywords are the most frequent content words (ties by first occurrence);
/// the summary lists them. Each content line is read as "<speaker>: <text>"
/// and the speaker label is ignored.
class KeywordSummarizer final : public Summarizer {
 public:
  explicit KeywordSummarizer(std::shared_ptr<CallLog> log = nullptr, std::size_t keyword_count = 5)
      : log_(std::move(log)), keyword_count_(keyword_count) {}

  Summary summarize(std::string_view content) override;
  /// True iff at least one content word of the utterance occurs in the summary.
  bool entails(std::string_view summary, std::string_view utterance) override;

 private:
  std::shared_ptr<CallLog> log_;
  std::size_t keyword_count_;
};

/// coreference/1.0 for identical strings (or identical token sets),
/// semantic/Jaccard for partial overlap, unrelated/0 otherwise.
class JaccardRelationScorer final : public RelationScorer {
 public:
  explicit JaccardRelationScorer(std::shared_ptr<CallLog> log = nullptr) : log_(std::move(log)) {}
  RelationScore score(std::string_view first, std::string_view second) override;

 private:
  std::shared_ptr<CallLog> log_;
};

/// Token-level Jaccard between query and candidate, floored at 0.01.
class JaccardRelevanceScorer final : public RelevanceScorer {
 public:
  static constexpr double kFloor = 0.01;
  explicit JaccardRelevanceScorer(std::shared_ptr<CallLog> log = nullptr) : log_(std::move(log)) {}
  double relevance(std::string_view query, std::string_view candidate) override;

 private:
  std::shared_ptr<CallLog> log_;
};

/// Extractive: answers with the top-ranked context passage.
class ExtractiveAnswerer final : public Answerer {
 public:
  explicit ExtractiveAnswerer(std::shared_ptr<CallLog> log = nullptr) : log_(std::move(log)) {}
  std::string answer(std::string_view question, std::span<const std::string> context) override;

 private:
  std::shared_ptr<CallLog> log_;
};

struct Options {
  std::size_t embedding_dim = 64;
  std::uint64_t seed = 0;
  bool with_answerer = true;
};

ProviderBundle make_bundle(const Options& options = {});

}  // namespace hgmem::mock
