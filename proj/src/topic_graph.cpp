#include "hgmem/topic_graph.hpp"

#include <algorithm>
#include <array>

#include "hgmem/errors.hpp"

namespace hgmem {

namespace {
constexpr std::array<std::pair<Relation, std::string_view>, 6> kRelationNames{{
    {Relation::support, "support"},
    {Relation::contradict, "contradict"},
    {Relation::coreference, "coreference"},
    {Relation::causal, "causal"},
    {Relation::semantic, "semantic"},
    {Relation::unrelated, "unrelated"},
}};
}  // namespace

std::string_view to_string(Relation r) {
  for (const auto& [rel, name] : kRelationNames) {
    if (rel == r) return name;
  }
  return "unrelated";
}

std::optional<Relation> relation_from_string(std::string_view s) {
  for (const auto& [rel, name] : kRelationNames) {
    if (name == s) return rel;
  }
  return std::nullopt;
}

bool is_directed(Relation r) {
  return r == Relation::support || r == Relation::contradict || r == Relation::causal;
}

const TopicNode* TopicGraph::find(TopicId id) const {
  auto it = position_.find(id);
  return it == position_.end() ? nullptr : &nodes_[it->second];
}

std::vector<TopicId> TopicGraph::neighbors(TopicId id) const {
  if (!contains(id)) throw ValidationError("neighbors: unknown topic id " + to_string(id));
  auto it = adjacency_.find(id);
  if (it == adjacency_.end()) return {};
  auto out = it->second;
  std::sort(out.begin(), out.end());
  return out;
}

bool TopicGraph::has_edge_between(TopicId a, TopicId b) const {
  auto it = adjacency_.find(a);
  if (it == adjacency_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), b) != it->second.end();
}

void TopicGraph::add(TopicNode node, const std::vector<TopicEdge>& edges) {
  const TopicId id = node.id;
  index_.add(id, node.embedding);
  position_[id] = nodes_.size();
  nodes_.push_back(std::move(node));
  for (const auto& e : edges) add_edge(e);
}

void TopicGraph::add_edge(const TopicEdge& edge) {
  edges_.push_back(edge);
  adjacency_[edge.from_id].push_back(edge.to_id);
  adjacency_[edge.to_id].push_back(edge.from_id);
}

}  // namespace hgmem
