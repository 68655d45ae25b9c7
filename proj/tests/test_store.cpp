#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>

#include "hgmem/engine.hpp"
#include "hgmem/errors.hpp"
#include "hgmem/harness.hpp"
#include "hgmem/mock_providers.hpp"
#include "hgmem/store.hpp"
#include "support.hpp"

using namespace hgmem;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hgmem_store_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

MemorySnapshot sample(std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  auto s = testsupport::random_snapshot(rng, 25, 0.2);
  s.append_event(testsupport::utterance("live", "Ann", "unconsolidated 10:30 line", "2024-02-03T10:30:00Z"));
  return s;
}

std::string expect_corrupt(const std::string& bytes) {
  try {
    store::decode(bytes);
  } catch (const CorruptionError& e) {
    return e.invariant();
  }
  ADD_FAILURE() << "decode accepted the document";
  return "";
}

}  // namespace

TEST(Store, EncodeDecodeRoundTrip) {
  const auto s = sample();
  const auto bytes = store::encode(s);
  const auto doc = json::parse(bytes);
  EXPECT_EQ(doc["format_version"], store::kFormatVersion);
  EXPECT_EQ(doc["snapshot_hash"], s.hash());
  const auto back = store::decode(bytes);
  EXPECT_EQ(back.hash(), s.hash());
  EXPECT_EQ(store::encode(back), bytes);
  EXPECT_EQ(back.topic_graph().index(), s.topic_graph().index());
}

TEST(Store, DecodedSnapshotKeepsWorking) {
  auto back = store::decode(store::encode(sample()));
  auto fresh = sample();
  back.append_event(testsupport::utterance("live", "Ben", "more"));
  fresh.append_event(testsupport::utterance("live", "Ben", "more"));
  EXPECT_EQ(back.hash(), fresh.hash());
}

TEST(Store, SaveLoadRoundTrip) {
  const auto s = sample(2);
  const auto path = temp_path("snap.json");
  store::save(s, path);
  EXPECT_EQ(store::load(path).hash(), s.hash());
  EXPECT_FALSE(fs::exists(path.string() + ".tmp." + std::to_string(::getpid())));
}

TEST(Store, UnwritableAndMissingPathsAreIoErrors) {
  EXPECT_THROW(store::save(sample(), "/nonexistent-dir/x/snap.json"), IoError);
  EXPECT_THROW(store::load(temp_path("missing.json")), IoError);
}

TEST(Store, ScalingSnapshotRoundTripsQuickly) {
  const auto corpus = harness::load_corpus(testsupport::fixture("scaling"));
  Engine engine(EngineConfig{}, mock::make_bundle());
  harness::replay(corpus, engine, harness::Strategy{});
  const auto snap = engine.snapshot();
  EXPECT_GT(snap->topic_graph().size(), 50u);
  const auto path = temp_path("scaling.json");
  const auto t0 = std::chrono::steady_clock::now();
  store::save(*snap, path);
  const auto back = store::load(path);
  const auto dt = std::chrono::steady_clock::now() - t0;
  EXPECT_EQ(back.hash(), snap->hash());
  EXPECT_LT(std::chrono::duration<double>(dt).count(), 1.0);
}

TEST(Store, NamedCorruption) {
  const auto base = json::parse(store::encode(sample()));
  auto mutate = [&](auto&& fn) {
    auto d = base;
    fn(d);
    return expect_corrupt(d.dump());
  };
  EXPECT_EQ(mutate([](json& d) { d["cross_index"][0]["archive_id"] = 9999; }), "cross_index_archive");
  EXPECT_EQ(mutate([](json& d) { d["cross_index"].erase(0); }), "cross_index_topic");
  EXPECT_EQ(mutate([](json& d) { d["topic_nodes"][1]["id"] = d["topic_nodes"][0]["id"]; }), "topic_id_unique");
  EXPECT_EQ(mutate([](json& d) { d["topic_nodes"][0]["embedding"][0] = 5.0; }), "embedding_norm");
  EXPECT_EQ(mutate([](json& d) { d["topic_nodes"][0]["embedding"].erase(0); }), "embedding_dim");
  EXPECT_EQ(mutate([](json& d) { d["topic_nodes"][0]["raw"] = "x"; }), "raw_concatenation");
  EXPECT_EQ(mutate([](json& d) { d["topic_edges"][0]["weight"] = 0.1; }), "topic_edge_weight");
  EXPECT_EQ(mutate([](json& d) { d["topic_edges"][0]["to_id"] = 777; }), "topic_edge_endpoint");
  EXPECT_EQ(mutate([](json& d) { d["topic_edges"][0]["relation"] = "friendly"; }), "topic_edge_relation");
  EXPECT_EQ(mutate([](json& d) {
              auto t = d["archives"][0]["nodes"][0]["text"].get<std::string>();
              t[0] = t[0] == 'Q' ? 'R' : 'Q';
              d["archives"][0]["nodes"][0]["text"] = t;
            }),
            "raw_concatenation");
  EXPECT_EQ(mutate([](json& d) { d["archives"][0]["edges"] = json::array(); }), "event_graph_structure");
  EXPECT_EQ(mutate([](json& d) { d["active_buffer"]["nodes"][0]["token_count"] = 99; }), "token_count");
  EXPECT_EQ(mutate([](json& d) { d["config"]["tau"] = 2.0; }), "config");
  EXPECT_EQ(mutate([](json& d) { d["format_version"] = "2.0"; }), "format_version");
  EXPECT_EQ(mutate([](json& d) { d["surprise"] = 1; }), "schema");
  EXPECT_EQ(mutate([](json& d) { d.erase("logical_clock"); }), "schema");
  EXPECT_EQ(mutate([](json& d) { d["logical_clock"] = 1; }), "logical_clock");
  EXPECT_EQ(mutate([](json& d) { d["active_buffer"]["nodes"][0]["speaker"] = "Zed"; }), "snapshot_hash");
  EXPECT_EQ(expect_corrupt("{not json"), "json");
  EXPECT_EQ(expect_corrupt(""), "json");
}

TEST(Store, SingleByteMutationFuzz) {
  const auto s = sample(3);
  const auto bytes = store::encode(s);
  std::mt19937_64 rng(99);
  std::size_t accepted = 0, rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    auto m = bytes;
    m[rng() % m.size()] = static_cast<char>(rng() % 256);
    try {
      const auto back = store::decode(m);
      // Anything accepted must be the same snapshot (whitespace or equivalent bytes).
      EXPECT_EQ(back.hash(), s.hash());
      ++accepted;
    } catch (const CorruptionError&) {
      ++rejected;
    }
  }
  EXPECT_EQ(accepted + rejected, 1000u);
  EXPECT_GT(rejected, 900u);
}

TEST(Store, VectorTopkAndRebuildAgree) {
  std::mt19937_64 rng(4);
  const auto s = testsupport::random_snapshot(rng, 120, 0.0);
  const auto rebuilt = store::rebuild_index(s.topic_graph(), 64);
  EXPECT_EQ(rebuilt, s.topic_graph().index());
  for (int i = 0; i < 20; ++i) {
    const auto q = testsupport::random_unit(rng, 64);
    EXPECT_EQ(store::vector_topk(rebuilt, q, 10), store::vector_topk(s.topic_graph().index(), q, 10));
  }
  EXPECT_TRUE(store::vector_topk(VectorIndex(64), testsupport::random_unit(rng, 64), 5).empty());
}

TEST(Store, IndexCoherentAfterEveryConsolidation) {
  auto p = mock::make_bundle();
  std::mt19937_64 rng(5);
  MemorySnapshot s;
  for (int i = 0; i < 30; ++i) {
    s.append_event(testsupport::utterance("s", "Ann", testsupport::random_text(rng)));
    s = consolidate_segment(s, 1, p).snapshot;
    EXPECT_EQ(store::rebuild_index(s.topic_graph(), 64), s.topic_graph().index());
  }
}
