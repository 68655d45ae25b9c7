#include "hgmem/retrieval.hpp"

#include <cmath>
#include <algorithm>
#include <map>
#include <numeric>
#include <regex>
#include <set>

#include "hgmem/errors.hpp"
#include "hgmem/mock_providers.hpp"
#include "hgmem/text.hpp"

namespace hgmem {

Query query_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("query must be a JSON object");
  Query q;
  if (!j.contains("text") || !j.at("text").is_string()) throw ValidationError("query.text is required");
  q.text = j.at("text").get<std::string>();
  if (text::estimate_tokens(q.text) == 0) throw ValidationError("query.text is empty");
  if (j.contains("asked_at") && !j.at("asked_at").is_null()) {
    if (!j.at("asked_at").is_string()) throw ValidationError("query.asked_at must be a string");
    q.asked_at = j.at("asked_at").get<std::string>();
  }
  if (j.contains("target_speakers") && !j.at("target_speakers").is_null()) {
    const auto& ts = j.at("target_speakers");
    if (!ts.is_array()) throw ValidationError("query.target_speakers must be an array");
    for (const auto& s : ts) {
      if (!s.is_string()) throw ValidationError("query.target_speakers must hold strings");
      q.target_speakers.push_back(s.get<std::string>());
    }
  }
  if (j.contains("time_sensitive") && !j.at("time_sensitive").is_null()) {
    if (!j.at("time_sensitive").is_boolean()) throw ValidationError("query.time_sensitive must be boolean");
    q.time_sensitive = j.at("time_sensitive").get<bool>();
  }
  return q;
}

std::vector<TopicId> AnchorSet::ids() const {
  std::vector<TopicId> out;
  for (const auto& s : seeds) out.push_back(s.id);
  out.insert(out.end(), expansions.begin(), expansions.end());
  std::sort(out.begin(), out.end());
  return out;
}

AnchorSet anchor(const TopicGraph& topics, std::span<const double> query_embedding, std::size_t k) {
  if (k == 0) throw ValidationError("anchor: k must be >= 1");
  AnchorSet out;
  if (topics.empty()) return out;
  out.seeds = topics.index().topk(query_embedding, k);
  std::set<TopicId> seed_ids;
  for (const auto& s : out.seeds) seed_ids.insert(s.id);
  std::set<TopicId> expansions;
  for (const auto& s : out.seeds) {
    for (auto n : topics.neighbors(s.id)) {
      if (!seed_ids.count(n)) expansions.insert(n);
    }
  }
  out.expansions.assign(expansions.begin(), expansions.end());
  return out;
}

std::vector<Candidate> drill_down(const MemorySnapshot& snapshot, const AnchorSet& anchors, bool include_live) {
  std::map<EventId, Candidate> by_id;
  for (auto topic : anchors.ids()) {
    if (!snapshot.topic_graph().contains(topic)) {
      throw ValidationError("drill_down: unknown anchor " + to_string(topic));
    }
    auto link = snapshot.cross_index().find(topic);
    if (link == snapshot.cross_index().end()) {
      throw CorruptionError("cross_index_topic", "anchor " + to_string(topic) + " has no cross link");
    }
    auto arch = snapshot.archives().find(link->second);
    if (arch == snapshot.archives().end()) {
      throw CorruptionError("cross_index_archive", "anchor " + to_string(topic) + " links a missing archive");
    }
    for (const auto& n : arch->second->nodes()) {
      // ids() is ascending, so the first anchor seen is the smallest.
      by_id.try_emplace(n.id, Candidate{n, link->second, topic});
    }
  }
  std::vector<Candidate> out;
  out.reserve(by_id.size() + snapshot.active_buffer().size());
  for (auto& [_, c] : by_id) out.push_back(std::move(c));
  if (include_live) {
    for (const auto& n : snapshot.active_buffer().nodes()) out.push_back(Candidate{n, std::nullopt, std::nullopt});
  }
  return out;
}

double modulated_score(double p_sem, const Indicators& ind, const EngineConfig& config) {
  double score = p_sem;
  if (ind.time) score *= config.beta_time;
  if (ind.conf) score *= config.beta_conf;
  if (ind.role) score *= config.beta_role;
  return score;
}

std::vector<std::size_t> rank_order(std::span<const ScoringInput> inputs, const EngineConfig& config) {
  std::vector<double> scores;
  scores.reserve(inputs.size());
  for (const auto& in : inputs) scores.push_back(modulated_score(in.p_sem, in.indicators, config));
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (inputs[a].id != inputs[b].id) return inputs[a].id > inputs[b].id;
    return a < b;
  });
  return order;
}

namespace {

const std::regex& temporal_regex() {
  static const std::regex re(
      R"(\b(january|february|march|april|june|july|august|september|october|november|december|)"
      R"(monday|tuesday|wednesday|thursday|friday|saturday|sunday|weekend|)"
      R"(yesterday|today|tonight|tomorrow|last|ago|next)\b|\b(19|20)\d{2}\b|\b\d{1,2}[:/]\d{2}\b)",
      std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
  return re;
}

const std::regex& may_regex() {
  static const std::regex re(R"(\bMay\b)", std::regex::ECMAScript | std::regex::optimize);
  return re;
}

const std::regex& question_regex() {
  static const std::regex re(
      R"(\b(when|what time|what date|what day|which day|what year|which year|what month|how long)\b)",
      std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
  return re;
}

}  // namespace

bool has_temporal_expression(std::string_view t) {
  const std::string s(t);
  return std::regex_search(s, temporal_regex()) || std::regex_search(s, may_regex());
}

bool query_is_time_sensitive(const Query& query, TemporalClassifier* classifier) {
  if (query.time_sensitive) return *query.time_sensitive;
  if (classifier) {
    try {
      return classifier->time_sensitive(query.text);
    } catch (const Error&) {
      // fall through to the regex
    }
  }
  return has_temporal_expression(query.text) || std::regex_search(query.text, question_regex());
}

int time_indicator(bool query_time_sensitive, const EventNode& candidate) {
  if (!query_time_sensitive) return 0;
  if (candidate.timestamp && !candidate.timestamp->empty()) return 1;
  return has_temporal_expression(candidate.text) ? 1 : 0;
}

int role_indicator(const Query& query, const EventNode& candidate) {
  if (candidate.speaker.empty()) return 0;
  if (text::contains_icase(query.text, candidate.speaker)) return 1;
  const auto speaker = text::to_lower(candidate.speaker);
  for (const auto& s : query.target_speakers) {
    if (text::to_lower(s) == speaker) return 1;
  }
  return 0;
}

int conf_indicator(const EventNode& candidate) { return candidate.confidence_flag ? 1 : 0; }

RerankResult rerank(const Query& query, std::span<const Candidate> candidates, const ProviderBundle& providers,
                    const EngineConfig& config, std::size_t k) {
  if (candidates.empty()) throw ValidationError("rerank: empty candidate set");
  if (k == 0) k = static_cast<std::size_t>(config.retrieval_k);
  RerankResult out;

  std::vector<double> p_sem(candidates.size(), 0.0);
  try {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double p = providers.relevance_scorer->relevance(query.text, candidates[i].node.text);
      p_sem[i] = std::isfinite(p) ? std::clamp(p, 0.0, 1.0) : 0.0;
    }
  } catch (const Error&) {
    out.degraded = true;
    mock::HashedEmbedder fallback(static_cast<std::size_t>(config.embedding_dim), 0);
    const auto qv = fallback.embed(query.text);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double c = dot(qv, fallback.embed(candidates[i].node.text));
      p_sem[i] = std::clamp(c, mock::JaccardRelevanceScorer::kFloor, 1.0);
    }
  }

  const bool sensitive = query_is_time_sensitive(query, providers.temporal_classifier.get());
  std::vector<ScoringInput> inputs;
  inputs.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& n = candidates[i].node;
    inputs.push_back({n.id, p_sem[i],
                      Indicators{time_indicator(sensitive, n), conf_indicator(n), role_indicator(query, n)}});
  }

  const auto order = rank_order(inputs, config);
  const std::size_t n = std::min(k, order.size());
  out.ranked.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& in = inputs[order[r]];
    const auto& c = candidates[order[r]];
    RankedCandidate rc;
    rc.event_node_id = in.id;
    rc.source_archive_id = c.source_archive_id;
    rc.anchor_topic_id = c.anchor_topic_id;
    rc.p_sem = in.p_sem;
    rc.indicators = in.indicators;
    rc.score = modulated_score(in.p_sem, in.indicators, config);
    rc.rank = r + 1;
    rc.session_id = c.node.session_id;
    rc.turn_index = c.node.turn_index;
    rc.speaker = c.node.speaker;
    rc.text = c.node.text;
    out.ranked.push_back(std::move(rc));
  }
  return out;
}

RetrievalResult retrieve(const MemorySnapshot& snapshot, const Query& query, const ProviderBundle& providers,
                         std::size_t k) {
  if (text::estimate_tokens(query.text) == 0) throw ValidationError("query text is empty");
  RetrievalResult out;
  if (!snapshot.topic_graph().empty()) {
    const auto qv = providers.embedder->embed(query.text);
    out.anchors = anchor(snapshot.topic_graph(), qv, static_cast<std::size_t>(snapshot.config().retrieval_k));
  }
  const auto candidates = drill_down(snapshot, out.anchors, true);
  out.candidate_count = candidates.size();
  if (candidates.empty()) return out;
  auto rr = rerank(query, candidates, providers, snapshot.config(), k);
  out.ranked = std::move(rr.ranked);
  out.degraded = rr.degraded;
  return out;
}

nlohmann::json to_json(const RankedCandidate& c) {
  auto opt = [](const auto& o) { return o ? nlohmann::json(o->value) : nlohmann::json(nullptr); };
  return nlohmann::json{
      {"rank", c.rank},
      {"event_node_id", c.event_node_id.value},
      {"source_archive_id", opt(c.source_archive_id)},
      {"anchor_topic_id", opt(c.anchor_topic_id)},
      {"p_sem", c.p_sem},
      {"indicators", {{"time", c.indicators.time}, {"conf", c.indicators.conf}, {"role", c.indicators.role}}},
      {"score", c.score},
      {"session_id", c.session_id},
      {"turn_index", c.turn_index},
      {"speaker", c.speaker},
      {"text", c.text},
  };
}

}  // namespace hgmem
