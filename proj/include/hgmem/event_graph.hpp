#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hgmem/ids.hpp"

namespace hgmem {

/// One utterance as captured in the episodic buffer.
struct EventNode {
  EventId id;
  std::string session_id;
  std::uint64_t turn_index = 0;
  std::string speaker;
  std::string text;
  std::optional<std::string> timestamp;  // ISO-8601
  std::uint64_t token_count = 0;
  bool confidence_flag = true;

  bool operator==(const EventNode&) const = default;
};

enum class EventEdgeKind { sequential };

struct EventEdge {
  EventId from_id;
  EventId to_id;
  EventEdgeKind kind = EventEdgeKind::sequential;

  bool operator==(const EventEdge&) const = default;
};

/// Append-only event progression graph. The active buffer is unfrozen with
/// graph_id 0; archived graphs are frozen under their archive id and reject
/// every mutation.
class EventGraph {
 public:
  EventGraph() = default;

  /// Rebuilds a graph from persisted parts. Structure is not validated here.
  static EventGraph from_parts(ArchiveId graph_id, std::vector<EventNode> nodes,
                               std::vector<EventEdge> edges, bool frozen);

  ArchiveId graph_id() const noexcept { return graph_id_; }
  const std::vector<EventNode>& nodes() const noexcept { return nodes_; }
  const std::vector<EventEdge>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  bool frozen() const noexcept { return frozen_; }
  std::uint64_t token_total() const noexcept { return token_total_; }

  const EventNode* find(EventId id) const;

  /// Appends a node and, when a predecessor exists, the sequential edge
  /// predecessor -> node.
  void append(EventNode node);

  /// Moves the first `count` nodes (and the sequential edges among them)
  /// into a new graph. The edge that crossed the cut is dropped.
  EventGraph split_prefix(std::size_t count);

  void set_confidence(std::size_t index, bool flag);

  void freeze(ArchiveId id);

  /// Checks edge endpoints and the sequential path shape.
  /// Returns an empty string when consistent, otherwise a description.
  std::string structural_fault() const;

 private:
  void require_mutable(const char* op) const;

  ArchiveId graph_id_{};
  std::vector<EventNode> nodes_;
  std::vector<EventEdge> edges_;
  std::uint64_t token_total_ = 0;
  bool frozen_ = false;
};

/// The c_raw rendering: "\n<speaker>: <text>" for every node, in order.
std::string render_raw(std::span<const EventNode> nodes);

}  // namespace hgmem
