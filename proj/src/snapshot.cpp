#include "hgmem/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include <openssl/evp.h>

#include "hgmem/errors.hpp"
#include "hgmem/text.hpp"

namespace hgmem {

namespace {

constexpr double kNormTolerance = 1e-6;

std::uint64_t pair_key_lo(TopicId a, TopicId b) { return std::min(a, b).value; }
std::uint64_t pair_key_hi(TopicId a, TopicId b) { return std::max(a, b).value; }

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

MemorySnapshot::MemorySnapshot(EngineConfig config)
    : config_(config), topics_(static_cast<std::size_t>(config.embedding_dim)) {
  config_.validate();
}

MemorySnapshot MemorySnapshot::restore(EngineConfig config, TopicGraph topics, EventGraph active,
                                       ArchiveMap archives, CrossIndex cross_index,
                                       std::uint64_t logical_clock) {
  MemorySnapshot s(config);
  s.topics_ = std::move(topics);
  s.active_ = std::move(active);
  s.archives_ = std::move(archives);
  s.cross_index_ = std::move(cross_index);
  s.logical_clock_ = logical_clock;
  s.check_invariants();
  s.rebuild_counters();
  return s;
}

void MemorySnapshot::rebuild_counters() {
  std::uint64_t max_event = 0;
  std::uint64_t max_archive = 0;
  next_turn_.clear();
  auto visit = [&](const EventGraph& g) {
    for (const auto& n : g.nodes()) {
      max_event = std::max(max_event, n.id.value);
      auto& next = next_turn_[n.session_id];
      next = std::max(next, n.turn_index + 1);
    }
  };
  for (const auto& [id, g] : archives_) {
    max_archive = std::max(max_archive, id.value);
    visit(*g);
  }
  visit(active_);
  std::uint64_t max_topic = 0;
  for (const auto& n : topics_.nodes()) max_topic = std::max(max_topic, n.id.value);
  next_event_ = max_event + 1;
  next_archive_ = max_archive + 1;
  next_topic_ = max_topic + 1;
  archive_owner_.clear();
  for (const auto& [topic, archive] : cross_index_) archive_owner_[archive] = topic;
}

const EventGraph& MemorySnapshot::archive(ArchiveId id) const {
  auto it = archives_.find(id);
  if (it == archives_.end()) throw ValidationError("unknown archive id " + to_string(id));
  return *it->second;
}

EventId MemorySnapshot::append_event(const Utterance& u) {
  if (state_ != EngineState::EpisodicBuffering) {
    throw StateError("append_event during semantic consolidation (re-entrant write)");
  }
  if (text::estimate_tokens(u.text) == 0) throw ValidationError("append_event: empty text");

  EventNode node;
  node.id = EventId{next_event_};
  node.session_id = u.session_id;
  auto& next_turn = next_turn_[u.session_id];
  node.turn_index = u.turn_index.value_or(next_turn);
  next_turn = std::max(next_turn, node.turn_index + 1);
  node.speaker = u.speaker;
  node.text = u.text;
  node.timestamp = u.timestamp;
  node.token_count = text::estimate_tokens(u.text);
  node.confidence_flag = true;

  active_.append(std::move(node));
  ++next_event_;
  ++logical_clock_;
  return EventId{next_event_ - 1};
}

void MemorySnapshot::begin_consolidation() {
  if (state_ != EngineState::EpisodicBuffering) throw StateError("consolidation already in progress");
  state_ = EngineState::SemanticConsolidation;
}

void MemorySnapshot::end_consolidation() {
  if (state_ != EngineState::SemanticConsolidation) throw StateError("no consolidation in progress");
  state_ = EngineState::EpisodicBuffering;
}

ArchiveId MemorySnapshot::archive_prefix(std::size_t count, std::span<const bool> confidence_flags) {
  if (state_ != EngineState::SemanticConsolidation) {
    throw StateError("archive outside a consolidation transaction");
  }
  if (active_.empty()) throw StateError("archive of an empty buffer");
  if (count == 0 || count > active_.size()) {
    throw StateError("archive of " + std::to_string(count) + " events from a buffer of " +
                     std::to_string(active_.size()));
  }
  if (!confidence_flags.empty() && confidence_flags.size() != count) {
    throw ValidationError("confidence flags do not match segment length");
  }
  EventGraph segment = active_.split_prefix(count);
  for (std::size_t i = 0; i < confidence_flags.size(); ++i) {
    segment.set_confidence(i, confidence_flags[i]);
  }
  const ArchiveId id{next_archive_++};
  segment.freeze(id);
  archives_.emplace(id, std::make_shared<const EventGraph>(std::move(segment)));
  ++logical_clock_;
  return id;
}

ArchiveId MemorySnapshot::archive_buffer() { return archive_prefix(active_.size()); }

void MemorySnapshot::insert_topic_node(TopicNode node, std::vector<TopicEdge> edges) {
  auto reject = [](const std::string& msg) { throw ValidationError("insert_topic_node: " + msg); };

  if (topics_.contains(node.id)) reject("duplicate topic id " + to_string(node.id));
  if (node.id.value == 0) reject("topic id 0 is reserved");
  if (static_cast<std::int64_t>(node.embedding.size()) != config_.embedding_dim) {
    reject("embedding dimension " + std::to_string(node.embedding.size()) + " != " +
           std::to_string(config_.embedding_dim));
  }
  if (std::abs(l2_norm(node.embedding) - 1.0) > kNormTolerance) reject("embedding is not unit norm");
  auto arch = archives_.find(node.source_archive_id);
  if (arch == archives_.end()) reject("source archive " + to_string(node.source_archive_id) + " missing");
  if (archive_owner_.count(node.source_archive_id)) {
    reject("archive " + to_string(node.source_archive_id) + " already linked");
  }
  if (node.raw != render_raw(arch->second->nodes())) reject("raw text does not match source archive");

  // Keep one edge per endpoint; a later duplicate wins only with strictly
  // higher weight.
  std::vector<TopicEdge> kept;
  for (const auto& e : edges) {
    const bool touches_from = e.from_id == node.id;
    const bool touches_to = e.to_id == node.id;
    if (touches_from == touches_to) reject("edge must touch the new node on exactly one endpoint");
    const TopicId other = touches_from ? e.to_id : e.from_id;
    if (!topics_.contains(other)) reject("dangling endpoint " + to_string(other));
    if (e.relation == Relation::unrelated) reject("unrelated pairs produce no edge");
    if (!(e.weight > config_.tau)) {
      reject("edge weight " + std::to_string(e.weight) + " <= tau " + std::to_string(config_.tau));
    }
    if (e.weight > 1.0) reject("edge weight above 1");
    if (e.directed != is_directed(e.relation)) reject("directedness does not match relation");
    auto same = std::find_if(kept.begin(), kept.end(), [&](const TopicEdge& k) {
      return pair_key_lo(k.from_id, k.to_id) == pair_key_lo(e.from_id, e.to_id) &&
             pair_key_hi(k.from_id, k.to_id) == pair_key_hi(e.from_id, e.to_id);
    });
    if (same == kept.end()) {
      kept.push_back(e);
    } else if (e.weight > same->weight) {
      *same = e;
    }
  }

  const TopicId id = node.id;
  const ArchiveId archive = node.source_archive_id;
  topics_.add(std::move(node), kept);
  cross_index_[id] = archive;
  archive_owner_[archive] = id;
  next_topic_ = std::max(next_topic_, id.value + 1);
  ++logical_clock_;
}

nlohmann::json to_json(const EventNode& n) {
  return nlohmann::json{
      {"id", n.id.value},
      {"session_id", n.session_id},
      {"turn_index", n.turn_index},
      {"speaker", n.speaker},
      {"text", n.text},
      {"timestamp", n.timestamp ? nlohmann::json(*n.timestamp) : nlohmann::json(nullptr)},
      {"token_count", n.token_count},
      {"confidence_flag", n.confidence_flag},
  };
}

nlohmann::json to_json(const EventGraph& g) {
  auto nodes = nlohmann::json::array();
  for (const auto& n : g.nodes()) nodes.push_back(to_json(n));
  auto edges = nlohmann::json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"from_id", e.from_id.value}, {"to_id", e.to_id.value}, {"kind", "sequential"}});
  }
  return nlohmann::json{{"graph_id", g.graph_id().value}, {"nodes", nodes}, {"edges", edges}};
}

nlohmann::json to_json(const TopicNode& n) {
  return nlohmann::json{
      {"id", n.id.value},
      {"summary", n.summary},
      {"keywords", n.keywords},
      {"raw", n.raw},
      {"embedding", n.embedding},
      {"created_at", n.created_at},
      {"source_archive_id", n.source_archive_id.value},
  };
}

nlohmann::json to_json(const TopicEdge& e) {
  return nlohmann::json{
      {"from_id", e.from_id.value},
      {"to_id", e.to_id.value},
      {"relation", std::string(to_string(e.relation))},
      {"weight", e.weight},
      {"directed", e.directed},
  };
}

namespace {

nlohmann::json topic_layer_json(const TopicGraph& topics, const ArchiveMap& archives,
                                const CrossIndex& cross) {
  auto nodes = nlohmann::json::array();
  for (const auto& n : topics.nodes()) nodes.push_back(to_json(n));
  auto edges = nlohmann::json::array();
  for (const auto& e : topics.edges()) edges.push_back(to_json(e));
  auto arch = nlohmann::json::array();
  for (const auto& [id, g] : archives) arch.push_back(to_json(*g));
  auto xi = nlohmann::json::array();
  for (const auto& [topic, archive] : cross) {
    xi.push_back({{"topic_id", topic.value}, {"archive_id", archive.value}});
  }
  return nlohmann::json{
      {"topic_nodes", nodes}, {"topic_edges", edges}, {"archives", arch}, {"cross_index", xi}};
}

}  // namespace

nlohmann::json MemorySnapshot::to_json() const {
  auto doc = topic_layer_json(topics_, archives_, cross_index_);
  doc["active_buffer"] = hgmem::to_json(active_);
  doc["config"] = hgmem::to_json(config_);
  doc["logical_clock"] = logical_clock_;
  return doc;
}

std::string MemorySnapshot::serialize() const { return to_json().dump(); }

std::string MemorySnapshot::topic_layer_bytes() const {
  return topic_layer_json(topics_, archives_, cross_index_).dump();
}

std::string MemorySnapshot::hash() const { return sha256_hex(serialize()); }

void MemorySnapshot::check_invariants() const {
  auto fail = [](const char* invariant, const std::string& detail) {
    throw CorruptionError(invariant, detail);
  };

  try {
    config_.validate();
  } catch (const ValidationError& e) {
    fail("config", e.what());
  }
  if (state_ != EngineState::EpisodicBuffering) fail("state", "snapshot captured mid-consolidation");

  std::unordered_set<EventId> event_ids;
  auto check_graph = [&](const EventGraph& g, const std::string& label) {
    if (auto fault = g.structural_fault(); !fault.empty()) fail("event_graph_structure", label + ": " + fault);
    for (const auto& n : g.nodes()) {
      if (n.id.value == 0) fail("event_id_unique", label + ": event id 0 is reserved");
      if (!event_ids.insert(n.id).second) fail("event_id_unique", "event id " + to_string(n.id) + " repeated");
      if (n.token_count != text::estimate_tokens(n.text)) {
        fail("token_count", label + ": event " + to_string(n.id) + " token_count mismatch");
      }
      if (n.token_count == 0) fail("token_count", label + ": event " + to_string(n.id) + " has empty text");
    }
  };
  if (active_.frozen()) fail("active_buffer", "active buffer is marked frozen");
  if (active_.graph_id().value != 0) fail("active_buffer", "active buffer graph_id must be 0");
  check_graph(active_, "active_buffer");
  for (const auto& [id, g] : archives_) {
    if (!g) fail("archive", "null archive " + to_string(id));
    if (g->graph_id() != id) fail("archive", "archive key " + to_string(id) + " != graph_id");
    if (!g->frozen()) fail("archive_immutable", "archive " + to_string(id) + " not frozen");
    if (g->empty()) fail("archive", "archive " + to_string(id) + " is empty");
    check_graph(*g, "archive " + to_string(id));
  }

  // cross_index: every topic exactly once, targets exist, no archive shared.
  std::map<ArchiveId, TopicId> owners;
  for (const auto& [topic, archive] : cross_index_) {
    if (!topics_.contains(topic)) fail("cross_index_topic", "cross_index names unknown topic " + to_string(topic));
    if (!archives_.count(archive)) {
      fail("cross_index_archive", "topic " + to_string(topic) + " points at missing archive " + to_string(archive));
    }
    if (!owners.emplace(archive, topic).second) {
      fail("cross_index_bijection", "archive " + to_string(archive) + " linked twice");
    }
  }

  std::unordered_set<TopicId> topic_ids;
  std::optional<TopicId> prev;
  for (const auto& n : topics_.nodes()) {
    if (n.id.value == 0) fail("topic_id_unique", "topic id 0 is reserved");
    if (!topic_ids.insert(n.id).second) fail("topic_id_unique", "topic id " + to_string(n.id) + " repeated");
    if (prev && !(*prev < n.id)) fail("topic_id_order", "topic ids not ascending");
    prev = n.id;
    auto xi = cross_index_.find(n.id);
    if (xi == cross_index_.end()) fail("cross_index_topic", "topic " + to_string(n.id) + " missing from cross_index");
    if (xi->second != n.source_archive_id) {
      fail("cross_index_topic", "topic " + to_string(n.id) + " cross link disagrees with source_archive_id");
    }
    if (static_cast<std::int64_t>(n.embedding.size()) != config_.embedding_dim) {
      fail("embedding_dim", "topic " + to_string(n.id) + " embedding has wrong dimension");
    }
    for (double x : n.embedding) {
      if (!std::isfinite(x)) fail("embedding_norm", "topic " + to_string(n.id) + " has non-finite embedding");
    }
    if (std::abs(l2_norm(n.embedding) - 1.0) > kNormTolerance) {
      fail("embedding_norm", "topic " + to_string(n.id) + " embedding not unit norm");
    }
    if (n.raw != render_raw(archive(n.source_archive_id).nodes())) {
      fail("raw_concatenation", "topic " + to_string(n.id) + " raw text does not match its archive");
    }
    if (n.created_at > logical_clock_) fail("logical_clock", "topic created after the current clock");
  }
  if (cross_index_.size() != topics_.size()) fail("cross_index_topic", "cross_index size differs from topic count");

  std::set<std::pair<std::uint64_t, std::uint64_t>> pairs;
  for (const auto& e : topics_.edges()) {
    if (!topics_.contains(e.from_id) || !topics_.contains(e.to_id)) fail("topic_edge_endpoint", "dangling topic edge");
    if (e.from_id == e.to_id) fail("topic_edge_endpoint", "self-loop on topic " + to_string(e.from_id));
    if (e.relation == Relation::unrelated) fail("topic_edge_relation", "stored edge labelled unrelated");
    if (!(e.weight > config_.tau) || !(e.weight <= 1.0)) fail("topic_edge_weight", "edge weight outside (tau, 1]");
    if (e.directed != is_directed(e.relation)) fail("topic_edge_direction", "directed flag does not match relation");
    if (!pairs.emplace(pair_key_lo(e.from_id, e.to_id), pair_key_hi(e.from_id, e.to_id)).second) {
      fail("topic_edge_multiplicity", "more than one edge between a node pair");
    }
  }

  if (topics_.index().size() != topics_.size()) fail("index_coherence", "vector index size mismatch");
}

}  // namespace hgmem
