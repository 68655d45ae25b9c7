#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hgmem/boundary.hpp"
#include "hgmem/consolidation.hpp"
#include "hgmem/providers.hpp"
#include "hgmem/retrieval.hpp"
#include "hgmem/snapshot.hpp"

namespace hgmem {

/// A primitive state change. Replaying the log against the same providers
/// reproduces the snapshot.
struct Mutation {
  enum class Kind { append, consolidate };
  Kind kind = Kind::append;
  Utterance utterance;          // append
  std::size_t segment_length = 0;  // consolidate
  bool forced = false;             // consolidate
};

struct EngineTelemetry {
  std::map<TriggerKind, std::size_t> triggers;
  std::vector<ConsolidationReport> reports;
  std::size_t aborted = 0;
  /// Discriminator transport failures; the buffer is kept for the next trigger.
  std::size_t discriminator_failures = 0;
  std::size_t degraded_verdicts = 0;

  std::size_t trigger_count(TriggerKind kind) const;
};

struct IngestOutcome {
  /// Another call is draining the queue; the utterance will be applied there.
  bool queued = false;
  std::vector<ConsolidationReport> reports;
};

/// Single-writer driver around a MemorySnapshot.
///
/// Appends go through a queue so an utterance arriving while a
/// consolidation is in flight (from another thread or from inside a
/// provider) is applied after the transaction commits. Readers take the
/// published immutable snapshot.
class Engine {
 public:
  Engine(EngineConfig config, ProviderBundle providers);
  Engine(MemorySnapshot snapshot, ProviderBundle providers);

  std::shared_ptr<const MemorySnapshot> snapshot() const;
  const ProviderBundle& providers() const noexcept { return providers_; }
  const EngineConfig& config() const noexcept { return config_; }

  /// Appends the utterance and evaluates the sparse triggers: a pause
  /// before it (same session, timestamp gap over the configured minutes),
  /// overflow after it, then the session end when `session_end` is set.
  IngestOutcome ingest(const Utterance& utterance, bool session_end = false);

  /// Appends without evaluating any trigger.
  void append(const Utterance& utterance);

  /// Runs the discriminator once for `kind` and consolidates each detected
  /// segment in order. No-op on an empty buffer.
  std::vector<ConsolidationReport> fire(TriggerKind kind);

  /// Consolidates the first `count` buffered events without consulting the
  /// discriminator. Returns nothing when the transaction aborted.
  std::optional<ConsolidationReport> consolidate_prefix(std::size_t count, bool forced = false);

  RetrievalResult query(const Query& query, std::size_t k = 0) const;

  const EngineTelemetry& telemetry() const noexcept { return telemetry_; }
  const std::vector<Mutation>& mutation_log() const noexcept { return log_; }

 private:
  std::vector<ConsolidationReport> apply(const Utterance& utterance, bool session_end);
  std::vector<ConsolidationReport> fire_locked(TriggerKind kind);
  std::optional<ConsolidationReport> consolidate_locked(std::size_t count, bool forced);
  bool pause_before(const Utterance& utterance) const;
  void publish();

  EngineConfig config_;
  ProviderBundle providers_;
  MemorySnapshot state_;
  std::shared_ptr<const MemorySnapshot> published_;
  mutable std::mutex publish_mutex_;

  std::mutex queue_mutex_;
  std::deque<std::pair<Utterance, bool>> pending_;
  bool draining_ = false;

  EngineTelemetry telemetry_;
  std::vector<Mutation> log_;
};

/// Re-executes `log` from an empty snapshot.
MemorySnapshot replay_mutations(const EngineConfig& config, const ProviderBundle& providers,
                                const std::vector<Mutation>& log);

nlohmann::json to_json(const ConsolidationReport& report);

/// Minutes between two ISO-8601 timestamps ("YYYY-MM-DDTHH:MM[:SS][Z]"),
/// or nothing when either does not parse.
std::optional<double> minutes_between(const std::string& earlier, const std::string& later);

}  // namespace hgmem
