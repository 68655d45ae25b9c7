#include "hgmem/event_graph.hpp"

#include <unordered_set>

#include "hgmem/errors.hpp"

namespace hgmem {

EventGraph EventGraph::from_parts(ArchiveId graph_id, std::vector<EventNode> nodes,
                                  std::vector<EventEdge> edges, bool frozen) {
  EventGraph g;
  g.graph_id_ = graph_id;
  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  for (const auto& n : g.nodes_) g.token_total_ += n.token_count;
  g.frozen_ = frozen;
  return g;
}

const EventNode* EventGraph::find(EventId id) const {
  for (const auto& n : nodes_) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

void EventGraph::require_mutable(const char* op) const {
  if (frozen_) {
    throw StateError(std::string(op) + " rejected: archived event graph " + to_string(graph_id_) +
                     " is immutable");
  }
}

void EventGraph::append(EventNode node) {
  require_mutable("append");
  if (!nodes_.empty()) {
    edges_.push_back(EventEdge{nodes_.back().id, node.id, EventEdgeKind::sequential});
  }
  token_total_ += node.token_count;
  nodes_.push_back(std::move(node));
}

EventGraph EventGraph::split_prefix(std::size_t count) {
  require_mutable("split");
  if (count == 0 || count > nodes_.size()) {
    throw StateError("split_prefix: count " + std::to_string(count) + " outside buffer of " +
                     std::to_string(nodes_.size()));
  }
  EventGraph head;
  head.nodes_.assign(std::make_move_iterator(nodes_.begin()),
                     std::make_move_iterator(nodes_.begin() + static_cast<std::ptrdiff_t>(count)));
  nodes_.erase(nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(count));

  std::unordered_set<EventId> in_head;
  for (const auto& n : head.nodes_) {
    in_head.insert(n.id);
    head.token_total_ += n.token_count;
  }
  token_total_ -= head.token_total_;

  std::vector<EventEdge> rest;
  for (const auto& e : edges_) {
    const bool from_head = in_head.count(e.from_id) != 0;
    const bool to_head = in_head.count(e.to_id) != 0;
    if (from_head && to_head) {
      head.edges_.push_back(e);
    } else if (!from_head && !to_head) {
      rest.push_back(e);
    }
  }
  edges_ = std::move(rest);
  return head;
}

void EventGraph::set_confidence(std::size_t index, bool flag) {
  require_mutable("set_confidence");
  nodes_.at(index).confidence_flag = flag;
}

void EventGraph::freeze(ArchiveId id) {
  require_mutable("freeze");
  graph_id_ = id;
  frozen_ = true;
}

std::string EventGraph::structural_fault() const {
  std::unordered_set<EventId> ids;
  for (const auto& n : nodes_) {
    if (!ids.insert(n.id).second) return "duplicate event id " + to_string(n.id);
  }
  const std::size_t expected = nodes_.empty() ? 0 : nodes_.size() - 1;
  if (edges_.size() != expected) {
    return "expected " + std::to_string(expected) + " sequential edges, found " +
           std::to_string(edges_.size());
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    if (e.from_id != nodes_[i].id || e.to_id != nodes_[i + 1].id) {
      return "sequential edge " + std::to_string(i) + " does not link consecutive nodes";
    }
  }
  return {};
}

std::string render_raw(std::span<const EventNode> nodes) {
  std::string out;
  for (const auto& n : nodes) {
    out += '\n';
    out += n.speaker;
    out += ": ";
    out += n.text;
  }
  return out;
}

}  // namespace hgmem
