#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hgmem/ids.hpp"
#include "hgmem/vector_index.hpp"

namespace hgmem {

/// Relation labels of the edge-weighting prompt. `unrelated` never becomes
/// an edge.
enum class Relation { support, contradict, coreference, causal, semantic, unrelated };

std::string_view to_string(Relation r);
std::optional<Relation> relation_from_string(std::string_view s);

/// support, contradict and causal are asymmetric; coreference and semantic
/// are symmetric.
bool is_directed(Relation r);

struct TopicNode {
  TopicId id;
  std::string summary;
  std::vector<std::string> keywords;
  std::string raw;
  std::vector<double> embedding;
  std::uint64_t created_at = 0;
  ArchiveId source_archive_id;

  bool operator==(const TopicNode&) const = default;
};

struct TopicEdge {
  TopicId from_id;
  TopicId to_id;
  Relation relation = Relation::semantic;
  double weight = 0.0;
  bool directed = false;

  bool operator==(const TopicEdge&) const = default;
};

/// Consolidated topic layer. Nodes are kept in id order, at most one edge
/// per unordered node pair.
class TopicGraph {
 public:
  explicit TopicGraph(std::size_t embedding_dim = 0) : index_(embedding_dim) {}

  const std::vector<TopicNode>& nodes() const noexcept { return nodes_; }
  const std::vector<TopicEdge>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  const TopicNode* find(TopicId id) const;
  bool contains(TopicId id) const { return find(id) != nullptr; }

  /// Every u with an edge {id, u} in either direction, ascending.
  /// Throws ValidationError for an unknown id.
  std::vector<TopicId> neighbors(TopicId id) const;

  bool has_edge_between(TopicId a, TopicId b) const;

  const VectorIndex& index() const noexcept { return index_; }

  /// Adds a node and its edges; callers have already validated them.
  void add(TopicNode node, const std::vector<TopicEdge>& edges);

  /// Adds an edge between existing nodes; used when restoring from disk.
  void add_edge(const TopicEdge& edge);

 private:
  std::vector<TopicNode> nodes_;
  std::unordered_map<TopicId, std::size_t> position_;
  std::vector<TopicEdge> edges_;
  std::unordered_map<TopicId, std::vector<TopicId>> adjacency_;
  VectorIndex index_;
};

}  // namespace hgmem
