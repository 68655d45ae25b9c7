#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hgmem/config.hpp"
#include "hgmem/event_graph.hpp"
#include "hgmem/topic_graph.hpp"

namespace hgmem {

enum class EngineState { EpisodicBuffering, SemanticConsolidation };

/// An incoming utterance before it becomes an EventNode. When turn_index is
/// absent the snapshot assigns the next index for the session.
struct Utterance {
  std::string session_id;
  std::string speaker;
  std::string text;
  std::optional<std::string> timestamp;
  std::optional<std::uint64_t> turn_index;
};

using ArchiveMap = std::map<ArchiveId, std::shared_ptr<const EventGraph>>;
using CrossIndex = std::map<TopicId, ArchiveId>;

/// Composite memory state: topic graph, active event buffer, archived event
/// graphs and the topic -> archive cross index.
///
/// Value type. Copies share archived graphs, which are immutable. A
/// consolidation transaction works on a copy and commits by assignment.
class MemorySnapshot {
 public:
  explicit MemorySnapshot(EngineConfig config = {});

  /// Rebuilds a snapshot from persisted parts and runs check_invariants().
  static MemorySnapshot restore(EngineConfig config, TopicGraph topics, EventGraph active,
                                ArchiveMap archives, CrossIndex cross_index,
                                std::uint64_t logical_clock);

  const EngineConfig& config() const noexcept { return config_; }
  const TopicGraph& topic_graph() const noexcept { return topics_; }
  const EventGraph& active_buffer() const noexcept { return active_; }
  const ArchiveMap& archives() const noexcept { return archives_; }
  const CrossIndex& cross_index() const noexcept { return cross_index_; }
  EngineState state() const noexcept { return state_; }
  std::uint64_t logical_clock() const noexcept { return logical_clock_; }

  /// Throws ValidationError when the archive does not exist.
  const EventGraph& archive(ArchiveId id) const;

  EventId append_event(const Utterance& utterance);

  void begin_consolidation();
  void end_consolidation();

  /// Freezes the first `count` buffered events into a fresh archive.
  /// Requires the SemanticConsolidation state. `confidence_flags`, when
  /// given, must have `count` entries and is stamped onto the nodes.
  ArchiveId archive_prefix(std::size_t count, std::span<const bool> confidence_flags = {});

  /// Whole-buffer archive.
  ArchiveId archive_buffer();

  TopicId next_topic_id() const noexcept { return TopicId{next_topic_}; }

  /// Adds `node` and `edges` atomically and links node -> source archive.
  /// Every check runs before any mutation.
  void insert_topic_node(TopicNode node, std::vector<TopicEdge> edges);

  std::vector<TopicId> neighbors(TopicId id) const { return topics_.neighbors(id); }

  /// Canonical document without the file header fields.
  nlohmann::json to_json() const;
  /// Canonical bytes; equal snapshots give equal bytes.
  std::string serialize() const;
  /// Serialization of topic_nodes, topic_edges, archives and cross_index only.
  std::string topic_layer_bytes() const;
  /// SHA-256 of serialize(), lowercase hex.
  std::string hash() const;

  /// Throws CorruptionError naming the first violated invariant.
  void check_invariants() const;

 private:
  void rebuild_counters();

  EngineConfig config_;
  TopicGraph topics_;
  EventGraph active_;
  ArchiveMap archives_;
  CrossIndex cross_index_;
  EngineState state_ = EngineState::EpisodicBuffering;
  std::uint64_t logical_clock_ = 0;

  std::uint64_t next_event_ = 1;
  std::uint64_t next_topic_ = 1;
  std::uint64_t next_archive_ = 1;
  std::unordered_map<std::string, std::uint64_t> next_turn_;
  std::map<ArchiveId, TopicId> archive_owner_;
};

std::string sha256_hex(std::string_view bytes);

nlohmann::json to_json(const EventNode& n);
nlohmann::json to_json(const EventGraph& g);
nlohmann::json to_json(const TopicNode& n);
nlohmann::json to_json(const TopicEdge& e);

}  // namespace hgmem
