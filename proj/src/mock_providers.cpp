#include "hgmem/mock_providers.hpp"

#include <algorithm>
#include <map>

#include "hgmem/text.hpp"

namespace hgmem::mock {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

void log_call(const std::shared_ptr<CallLog>& log, std::string_view provider, std::uint64_t in,
              std::uint64_t out) {
  if (!log) return;
  log->append(CallRecord{std::string(provider), in, out, modelled_latency(in, out)});
}

std::string format_boundaries(const std::vector<std::int64_t>& b) {
  std::string out = "{\"boundaries\": [";
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(b[i]);
  }
  return out + "]}";
}

}  // namespace

std::chrono::microseconds modelled_latency(std::uint64_t input_tokens, std::uint64_t output_tokens) {
  return std::chrono::microseconds(200 + 2 * static_cast<std::int64_t>(input_tokens) +
                                   20 * static_cast<std::int64_t>(output_tokens));
}

HashedEmbedder::HashedEmbedder(std::size_t dim, std::uint64_t seed, std::shared_ptr<CallLog> log)
    : dim_(dim), seed_(seed), log_(std::move(log)) {}

std::vector<double> HashedEmbedder::embed(std::string_view input) {
  std::vector<double> v(dim_, 0.0);
  const std::uint64_t bucket_basis = kFnvOffset ^ splitmix64(seed_);
  const std::uint64_t sign_basis = kFnvOffset ^ splitmix64(seed_ ^ 0x5bd1e995ULL);
  for (const auto& tok : text::normalize_tokens(input)) {
    const auto bucket = fnv1a(tok, bucket_basis) % dim_;
    const double sign = (fnv1a(tok, sign_basis) >> 63) ? -1.0 : 1.0;
    v[bucket] += sign;
  }
  const double norm = l2_norm(v);
  if (norm == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
  } else {
    for (auto& x : v) x /= norm;
  }
  log_call(log_, provider_name::embedder, text::estimate_tokens(input), 0);
  return v;
}

std::vector<std::int64_t> KeywordDiscriminator::detect(std::span<const EventNode> buffer) {
  std::vector<std::set<std::string>> words;
  words.reserve(buffer.size());
  for (const auto& n : buffer) words.push_back(text::content_words(n.text));

  auto window_union = [&](std::size_t first, std::size_t last) {
    std::set<std::string> u;
    for (std::size_t i = first; i <= last; ++i) u.insert(words[i].begin(), words[i].end());
    return u;
  };

  std::vector<std::int64_t> boundaries;
  bool previous_flagged = false;
  for (std::size_t i = 0; i + 1 < buffer.size(); ++i) {
    const std::size_t lo = i + 1 >= window_ ? i + 1 - window_ : 0;
    const std::size_t hi = std::min(buffer.size() - 1, i + window_);
    const auto left = window_union(lo, i);
    const auto right = window_union(i + 1, hi);
    const bool flagged = !left.empty() && !right.empty() && text::jaccard(left, right) == 0.0;
    if (flagged && !previous_flagged) boundaries.push_back(static_cast<std::int64_t>(i));
    previous_flagged = flagged;
  }
  log_call(log_, provider_name::discriminator, text::estimate_tokens(linearize_buffer(buffer)),
           text::estimate_tokens(format_boundaries(boundaries)));
  return boundaries;
}

Summary KeywordSummarizer::summarize(std::string_view content) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> freq;  // word -> (count, first)
  std::size_t position = 0;
  std::string fallback;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    if (auto colon = line.find(": "); colon != std::string_view::npos) line.remove_prefix(colon + 2);
    for (auto& tok : text::normalize_tokens(line)) {
      if (fallback.size() < 64) fallback += (fallback.empty() ? "" : " ") + tok;
      if (text::is_stopword(tok)) continue;
      auto [it, inserted] = freq.try_emplace(tok, 0, position);
      ++it->second.first;
      ++position;
    }
    start = end + 1;
  }
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.second.second < b.second.second;
  });
  Summary out;
  for (std::size_t i = 0; i < ranked.size() && i < keyword_count_; ++i) out.keywords.push_back(ranked[i].first);
  if (out.keywords.empty()) {
    out.summary = fallback.empty() ? std::string("empty exchange") : fallback;
  } else {
    for (std::size_t i = 0; i < out.keywords.size(); ++i) {
      if (i) out.summary += ", ";
      out.summary += out.keywords[i];
    }
  }
  std::uint64_t out_tokens = text::estimate_tokens(out.summary) + out.keywords.size();
  log_call(log_, provider_name::summarizer, text::estimate_tokens(content), out_tokens);
  return out;
}

bool KeywordSummarizer::entails(std::string_view summary, std::string_view utterance) {
  const auto summary_tokens = text::token_set(summary);
  bool entailed = false;
  for (const auto& w : text::content_words(utterance)) {
    if (summary_tokens.count(w)) {
      entailed = true;
      break;
    }
  }
  log_call(log_, provider_name::consistency,
           text::estimate_tokens(summary) + text::estimate_tokens(utterance), 1);
  return entailed;
}

RelationScore JaccardRelationScorer::score(std::string_view first, std::string_view second) {
  RelationScore out;
  if (first == second) {
    out = {Relation::coreference, 1.0};
  } else {
    const double j = text::jaccard(text::token_set(first), text::token_set(second));
    if (j >= 1.0) {
      out = {Relation::coreference, 1.0};
    } else if (j > 0.0) {
      out = {Relation::semantic, j};
    }
  }
  log_call(log_, provider_name::relation_scorer,
           text::estimate_tokens(first) + text::estimate_tokens(second), 4);
  return out;
}

double JaccardRelevanceScorer::relevance(std::string_view query, std::string_view candidate) {
  const double j = text::jaccard(text::token_set(query), text::token_set(candidate));
  log_call(log_, provider_name::relevance_scorer,
           text::estimate_tokens(query) + text::estimate_tokens(candidate), 1);
  return std::max(j, kFloor);
}

std::string ExtractiveAnswerer::answer(std::string_view question, std::span<const std::string> context) {
  std::string out = context.empty() ? std::string() : context.front();
  std::uint64_t in = text::estimate_tokens(question);
  for (const auto& c : context) in += text::estimate_tokens(c);
  log_call(log_, provider_name::answerer, in, text::estimate_tokens(out));
  return out;
}

ProviderBundle make_bundle(const Options& options) {
  ProviderBundle b;
  b.call_log = std::make_shared<CallLog>();
  b.embedder = std::make_shared<HashedEmbedder>(options.embedding_dim, options.seed, b.call_log);
  b.discriminator = std::make_shared<KeywordDiscriminator>(b.call_log);
  b.summarizer = std::make_shared<KeywordSummarizer>(b.call_log);
  b.relation_scorer = std::make_shared<JaccardRelationScorer>(b.call_log);
  b.relevance_scorer = std::make_shared<JaccardRelevanceScorer>(b.call_log);
  if (options.with_answerer) b.answerer = std::make_shared<ExtractiveAnswerer>(b.call_log);
  return b;
}

}  // namespace hgmem::mock
