#include "hgmem/engine.hpp"

#include <chrono>
#include <cstdio>

#include "hgmem/errors.hpp"

namespace hgmem {

std::size_t EngineTelemetry::trigger_count(TriggerKind kind) const {
  auto it = triggers.find(kind);
  return it == triggers.end() ? 0 : it->second;
}

Engine::Engine(EngineConfig config, ProviderBundle providers)
    : Engine(MemorySnapshot(config), std::move(providers)) {}

Engine::Engine(MemorySnapshot snapshot, ProviderBundle providers)
    : config_(snapshot.config()), providers_(std::move(providers)), state_(std::move(snapshot)) {
  config_.validate();
  providers_.require_complete();
  if (providers_.embedder->dimension() != static_cast<std::size_t>(config_.embedding_dim)) {
    throw ValidationError("embedder dimension does not match embedding_dim");
  }
  publish();
}

std::shared_ptr<const MemorySnapshot> Engine::snapshot() const {
  std::lock_guard lock(publish_mutex_);
  return published_;
}

void Engine::publish() {
  auto next = std::make_shared<const MemorySnapshot>(state_);
  std::lock_guard lock(publish_mutex_);
  published_ = std::move(next);
}

IngestOutcome Engine::ingest(const Utterance& utterance, bool session_end) {
  {
    std::lock_guard lock(queue_mutex_);
    pending_.emplace_back(utterance, session_end);
    if (draining_) return IngestOutcome{true, {}};
    draining_ = true;
  }
  IngestOutcome out;
  for (;;) {
    std::pair<Utterance, bool> next;
    {
      std::lock_guard lock(queue_mutex_);
      if (pending_.empty()) {
        draining_ = false;
        break;
      }
      next = std::move(pending_.front());
      pending_.pop_front();
    }
    try {
      auto reports = apply(next.first, next.second);
      out.reports.insert(out.reports.end(), reports.begin(), reports.end());
    } catch (...) {
      std::lock_guard lock(queue_mutex_);
      pending_.clear();
      draining_ = false;
      publish();
      throw;
    }
  }
  publish();
  return out;
}

std::vector<ConsolidationReport> Engine::apply(const Utterance& utterance, bool session_end) {
  std::vector<ConsolidationReport> reports;
  auto take = [&reports](std::vector<ConsolidationReport> r) {
    reports.insert(reports.end(), r.begin(), r.end());
  };

  if (pause_before(utterance)) take(fire_locked(TriggerKind::InteractionPause));

  state_.append_event(utterance);
  log_.push_back(Mutation{Mutation::Kind::append, utterance, 0, false});

  const auto limit = static_cast<std::uint64_t>(config_.buffer_token_limit);
  if (state_.active_buffer().token_total() > limit) take(fire_locked(TriggerKind::BufferOverflow));
  if (session_end && !state_.active_buffer().empty()) take(fire_locked(TriggerKind::SessionEnd));
  return reports;
}

bool Engine::pause_before(const Utterance& utterance) const {
  const auto& nodes = state_.active_buffer().nodes();
  if (nodes.empty() || !utterance.timestamp) return false;
  const auto& last = nodes.back();
  if (last.session_id != utterance.session_id || !last.timestamp) return false;
  const auto gap = minutes_between(*last.timestamp, *utterance.timestamp);
  return gap && *gap > static_cast<double>(config_.pause_gap_minutes);
}

void Engine::append(const Utterance& utterance) {
  state_.append_event(utterance);
  log_.push_back(Mutation{Mutation::Kind::append, utterance, 0, false});
  publish();
}

std::vector<ConsolidationReport> Engine::fire(TriggerKind kind) {
  auto reports = fire_locked(kind);
  publish();
  return reports;
}

std::vector<ConsolidationReport> Engine::fire_locked(TriggerKind kind) {
  if (state_.active_buffer().empty()) return {};
  ++telemetry_.triggers[kind];

  BoundaryVerdict verdict;
  try {
    verdict = check_boundary(state_, BoundaryTrigger{kind, state_.logical_clock()}, *providers_.discriminator);
  } catch (const ProviderError&) {
    ++telemetry_.discriminator_failures;
    return {};
  }
  if (verdict.degraded) ++telemetry_.degraded_verdicts;
  if (!verdict.boundary_detected) return {};

  std::vector<ConsolidationReport> reports;
  std::size_t consumed = 0;
  for (auto split : verdict.split_indices) {
    auto report = consolidate_locked(split + 1 - consumed, verdict.forced);
    if (!report) break;
    reports.push_back(std::move(*report));
    consumed = split + 1;
  }
  return reports;
}

std::optional<ConsolidationReport> Engine::consolidate_prefix(std::size_t count, bool forced) {
  auto report = consolidate_locked(count, forced);
  publish();
  return report;
}

std::optional<ConsolidationReport> Engine::consolidate_locked(std::size_t count, bool forced) {
  try {
    auto result = consolidate_segment(state_, count, providers_, forced);
    state_ = std::move(result.snapshot);
    log_.push_back(Mutation{Mutation::Kind::consolidate, {}, count, forced});
    telemetry_.reports.push_back(result.report);
    return std::move(result.report);
  } catch (const ConsolidationAborted&) {
    ++telemetry_.aborted;
    return std::nullopt;
  }
}

RetrievalResult Engine::query(const Query& q, std::size_t k) const {
  return retrieve(*snapshot(), q, providers_, k);
}

MemorySnapshot replay_mutations(const EngineConfig& config, const ProviderBundle& providers,
                                const std::vector<Mutation>& log) {
  MemorySnapshot snapshot(config);
  for (const auto& m : log) {
    if (m.kind == Mutation::Kind::append) {
      snapshot.append_event(m.utterance);
    } else {
      snapshot = consolidate_segment(snapshot, m.segment_length, providers, m.forced).snapshot;
    }
  }
  return snapshot;
}

nlohmann::json to_json(const ConsolidationReport& r) {
  nlohmann::json pool = nlohmann::json::array();
  for (const auto& c : r.candidate_pool) pool.push_back({{"topic_id", c.id.value}, {"similarity", c.similarity}});
  nlohmann::json scored = nlohmann::json::array();
  for (const auto& s : r.scored_relations) {
    scored.push_back({{"topic_id", s.topic_id.value},
                      {"relation", std::string(to_string(s.relation))},
                      {"weight", s.weight},
                      {"malformed", s.malformed}});
  }
  nlohmann::json skipped = nlohmann::json::array();
  for (auto id : r.skipped_candidates) skipped.push_back(id.value);
  return {{"new_topic_id", r.new_topic_id.value},
          {"archive_id", r.archive_id.value},
          {"segment_length", r.segment_length},
          {"candidate_pool", pool},
          {"scored_relations", scored},
          {"accepted_edges", r.accepted_edges},
          {"skipped_candidates", skipped},
          {"relation_calls", r.relation_calls},
          {"forced", r.forced},
          {"degraded", r.degraded},
          {"elapsed_us", r.elapsed.count()},
          {"provider_tokens", {{"input", r.provider_tokens.input}, {"output", r.provider_tokens.output}}}};
}

namespace {

std::optional<std::int64_t> epoch_seconds(const std::string& ts) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double s = 0;
  const int n = std::sscanf(ts.c_str(), "%4d-%2d-%2dT%2d:%2d:%lf", &y, &mo, &d, &h, &mi, &s);
  if (n < 5) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return days * 86400 + h * 3600 + mi * 60 + static_cast<std::int64_t>(s);
}

}  // namespace

std::optional<double> minutes_between(const std::string& earlier, const std::string& later) {
  const auto a = epoch_seconds(earlier);
  const auto b = epoch_seconds(later);
  if (!a || !b) return std::nullopt;
  return static_cast<double>(*b - *a) / 60.0;
}

}  // namespace hgmem
