#include "hgmem/store.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "hgmem/errors.hpp"

namespace hgmem::store {

namespace {

using nlohmann::json;

[[noreturn]] void corrupt(const char* invariant, const std::string& detail) {
  throw CorruptionError(invariant, detail);
}

const json& field(const json& obj, const char* key, const char* where) {
  if (!obj.is_object()) corrupt("schema", std::string(where) + " is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) corrupt("schema", std::string(where) + "." + key + " missing");
  return *it;
}

std::uint64_t as_u64(const json& v, const char* what) {
  if (!v.is_number_unsigned()) corrupt("schema", std::string(what) + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const char* what) {
  if (!v.is_string()) corrupt("schema", std::string(what) + " must be a string");
  return v.get<std::string>();
}

double as_double(const json& v, const char* what) {
  if (!v.is_number()) corrupt("schema", std::string(what) + " must be a number");
  return v.get<double>();
}

bool as_bool(const json& v, const char* what) {
  if (!v.is_boolean()) corrupt("schema", std::string(what) + " must be a boolean");
  return v.get<bool>();
}

const json& as_array(const json& v, const char* what) {
  if (!v.is_array()) corrupt("schema", std::string(what) + " must be an array");
  return v;
}

EventNode parse_event(const json& j) {
  EventNode n;
  n.id = EventId{as_u64(field(j, "id", "event"), "event.id")};
  n.session_id = as_string(field(j, "session_id", "event"), "event.session_id");
  n.turn_index = as_u64(field(j, "turn_index", "event"), "event.turn_index");
  n.speaker = as_string(field(j, "speaker", "event"), "event.speaker");
  n.text = as_string(field(j, "text", "event"), "event.text");
  const auto& ts = field(j, "timestamp", "event");
  if (!ts.is_null()) n.timestamp = as_string(ts, "event.timestamp");
  n.token_count = as_u64(field(j, "token_count", "event"), "event.token_count");
  n.confidence_flag = as_bool(field(j, "confidence_flag", "event"), "event.confidence_flag");
  return n;
}

EventGraph parse_graph(const json& j, bool frozen) {
  const auto graph_id = ArchiveId{as_u64(field(j, "graph_id", "event_graph"), "graph_id")};
  std::vector<EventNode> nodes;
  for (const auto& n : as_array(field(j, "nodes", "event_graph"), "nodes")) nodes.push_back(parse_event(n));
  std::vector<EventEdge> edges;
  for (const auto& e : as_array(field(j, "edges", "event_graph"), "edges")) {
    if (as_string(field(e, "kind", "event_edge"), "event_edge.kind") != "sequential") {
      corrupt("event_graph_structure", "unknown event edge kind");
    }
    edges.push_back(EventEdge{EventId{as_u64(field(e, "from_id", "event_edge"), "from_id")},
                              EventId{as_u64(field(e, "to_id", "event_edge"), "to_id")},
                              EventEdgeKind::sequential});
  }
  return EventGraph::from_parts(graph_id, std::move(nodes), std::move(edges), frozen);
}

TopicNode parse_topic(const json& j, std::size_t dim) {
  TopicNode n;
  n.id = TopicId{as_u64(field(j, "id", "topic"), "topic.id")};
  n.summary = as_string(field(j, "summary", "topic"), "topic.summary");
  for (const auto& k : as_array(field(j, "keywords", "topic"), "topic.keywords")) {
    n.keywords.push_back(as_string(k, "topic.keywords[]"));
  }
  n.raw = as_string(field(j, "raw", "topic"), "topic.raw");
  for (const auto& x : as_array(field(j, "embedding", "topic"), "topic.embedding")) {
    n.embedding.push_back(as_double(x, "topic.embedding[]"));
  }
  if (n.embedding.size() != dim) corrupt("embedding_dim", "topic " + to_string(n.id) + " embedding has wrong dimension");
  n.created_at = as_u64(field(j, "created_at", "topic"), "topic.created_at");
  n.source_archive_id = ArchiveId{as_u64(field(j, "source_archive_id", "topic"), "topic.source_archive_id")};
  return n;
}

TopicEdge parse_edge(const json& j) {
  TopicEdge e;
  e.from_id = TopicId{as_u64(field(j, "from_id", "topic_edge"), "topic_edge.from_id")};
  e.to_id = TopicId{as_u64(field(j, "to_id", "topic_edge"), "topic_edge.to_id")};
  auto rel = relation_from_string(as_string(field(j, "relation", "topic_edge"), "topic_edge.relation"));
  if (!rel) corrupt("topic_edge_relation", "unknown relation label");
  e.relation = *rel;
  e.weight = as_double(field(j, "weight", "topic_edge"), "topic_edge.weight");
  e.directed = as_bool(field(j, "directed", "topic_edge"), "topic_edge.directed");
  return e;
}

void check_version(const json& doc) {
  const auto version = as_string(field(doc, "format_version", "document"), "format_version");
  const auto dot = version.find('.');
  if (dot == std::string::npos || dot == 0) corrupt("format_version", "malformed version '" + version + "'");
  const std::string ours(kFormatVersion);
  if (version.substr(0, dot) != ours.substr(0, ours.find('.'))) {
    corrupt("format_version", "unsupported major version '" + version + "'");
  }
}

}  // namespace

std::string encode(const MemorySnapshot& snapshot) {
  auto doc = snapshot.to_json();
  doc["format_version"] = kFormatVersion;
  doc["snapshot_hash"] = snapshot.hash();
  return doc.dump() + "\n";
}

MemorySnapshot decode(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    corrupt("json", e.what());
  }
  if (!doc.is_object()) corrupt("schema", "document is not an object");

  try {
    check_version(doc);
    static const std::set<std::string> kKeys{"active_buffer", "archives",      "config",
                                             "cross_index",   "format_version", "logical_clock",
                                             "snapshot_hash", "topic_edges",   "topic_nodes"};
    for (const auto& [key, _] : doc.items()) {
      if (!kKeys.count(key)) corrupt("schema", "unexpected top-level key '" + key + "'");
    }

    EngineConfig config;
    try {
      config = engine_config_from_json(field(doc, "config", "document"));
    } catch (const ValidationError& e) {
      corrupt("config", e.what());
    }
    const auto dim = static_cast<std::size_t>(config.embedding_dim);

    std::vector<TopicNode> topic_nodes;
    for (const auto& t : as_array(field(doc, "topic_nodes", "document"), "topic_nodes")) {
      topic_nodes.push_back(parse_topic(t, dim));
    }
    std::vector<TopicEdge> topic_edges;
    for (const auto& e : as_array(field(doc, "topic_edges", "document"), "topic_edges")) {
      topic_edges.push_back(parse_edge(e));
    }

    ArchiveMap archives;
    for (const auto& a : as_array(field(doc, "archives", "document"), "archives")) {
      auto g = parse_graph(a, true);
      const auto id = g.graph_id();
      if (!archives.emplace(id, std::make_shared<const EventGraph>(std::move(g))).second) {
        corrupt("archive", "archive " + to_string(id) + " repeated");
      }
    }

    CrossIndex cross;
    for (const auto& x : as_array(field(doc, "cross_index", "document"), "cross_index")) {
      const TopicId t{as_u64(field(x, "topic_id", "cross_index"), "cross_index.topic_id")};
      const ArchiveId a{as_u64(field(x, "archive_id", "cross_index"), "cross_index.archive_id")};
      if (!cross.emplace(t, a).second) corrupt("cross_index_topic", "topic " + to_string(t) + " linked twice");
    }

    auto active = parse_graph(field(doc, "active_buffer", "document"), false);
    const auto clock = as_u64(field(doc, "logical_clock", "document"), "logical_clock");

    TopicGraph topics(dim);
    std::set<TopicId> seen;
    for (auto& n : topic_nodes) {
      if (!seen.insert(n.id).second) corrupt("topic_id_unique", "topic id " + to_string(n.id) + " repeated");
      topics.add(std::move(n), {});
    }
    for (const auto& e : topic_edges) {
      if (!topics.contains(e.from_id) || !topics.contains(e.to_id)) {
        corrupt("topic_edge_endpoint", "edge references a missing topic");
      }
      topics.add_edge(e);
    }

    auto snapshot = MemorySnapshot::restore(config, std::move(topics), std::move(active), std::move(archives),
                                            std::move(cross), clock);

    const auto stored_hash = as_string(field(doc, "snapshot_hash", "document"), "snapshot_hash");
    if (stored_hash != snapshot.hash()) corrupt("snapshot_hash", "content does not match recorded hash");
    return snapshot;
  } catch (const CorruptionError&) {
    throw;
  } catch (const json::exception& e) {
    corrupt("schema", e.what());
  } catch (const Error& e) {
    corrupt("structure", e.what());
  }
}

void save(const MemorySnapshot& snapshot, const std::filesystem::path& path) {
  const auto bytes = encode(snapshot);
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write snapshot to " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("short write while saving snapshot to " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move snapshot into place at " + path.string());
  }
}

MemorySnapshot load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read snapshot " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode(ss.str());
}

std::vector<ScoredTopic> vector_topk(const VectorIndex& index, std::span<const double> query, std::size_t k) {
  return index.topk(query, k);
}

VectorIndex rebuild_index(const TopicGraph& topics, std::size_t dim) {
  VectorIndex index(dim);
  for (const auto& n : topics.nodes()) index.add(n.id, n.embedding);
  return index;
}

}  // namespace hgmem::store
