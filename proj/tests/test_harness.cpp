#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hgmem/errors.hpp"
#include "hgmem/harness.hpp"
#include "hgmem/mock_providers.hpp"
#include "hgmem/synthetic.hpp"
#include "support.hpp"

using namespace hgmem;
using namespace hgmem::harness;
namespace fs = std::filesystem;

namespace {

DialogueCorpus tiny(std::size_t turns, std::size_t sessions = 1) {
  DialogueCorpus c;
  for (std::size_t i = 0; i < turns; ++i) {
    const auto sid = "s" + std::to_string(i * sessions / turns);
    c.turns.push_back(Turn{sid, i, i % 2 ? "Ben" : "Ann", "turn words number " + std::to_string(i), std::nullopt});
  }
  return c;
}

// Independent sampler following the documented draw sequence.
std::vector<std::size_t> noise_oracle(std::vector<std::size_t> b, double eta, std::uint64_t seed, bool forced,
                                      std::size_t n) {
  std::sort(b.begin(), b.end());
  std::mt19937_64 g(seed);
  std::set<std::size_t> out;
  for (auto x : b) {
    const double u = std::ldexp(static_cast<double>(g() >> 11), -53);
    if (u >= eta) {
      out.insert(x);
      continue;
    }
    if (forced) continue;
    if (g() % 2 == 0) continue;
    long long y = static_cast<long long>(x);
    switch (g() % 4) {
      case 0: y -= 2; break;
      case 1: y -= 1; break;
      case 2: y += 1; break;
      default: y += 2; break;
    }
    y = std::max(0LL, std::min(y, static_cast<long long>(n) - 1));
    out.insert(static_cast<std::size_t>(y));
  }
  const auto extra = static_cast<std::size_t>(std::floor(eta * static_cast<double>(b.size()) + 0.5));
  for (std::size_t i = 0; i < extra; ++i) {
    for (;;) {
      const auto p = static_cast<std::size_t>(g() % n);
      if (out.insert(p).second) break;
    }
  }
  return {out.begin(), out.end()};
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Corpus, JsonlRoundTripAndErrors) {
  const auto fx = synthetic::golden();
  const auto turns = parse_turns(to_jsonl(fx.corpus.turns));
  EXPECT_EQ(turns, fx.corpus.turns);
  EXPECT_EQ(parse_qa(to_jsonl(fx.corpus.qa)), fx.corpus.qa);
  try {
    parse_turns("{\"session_id\":\"a\",\"turn_index\":0,\"speaker\":\"A\",\"text\":\"x\"}\n{oops}\n");
    FAIL();
  } catch (const CorpusError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
  EXPECT_THROW(parse_qa(R"({"question":"q","gold_answer":"a","category":"weird","evidence_turn_ids":[]})"),
               CorpusError);
}

TEST(Corpus, ValidateCatchesDanglingEvidence) {
  auto c = tiny(3);
  c.qa.push_back(QaItem{"q", "a", Category::single_hop, {"s0:7"}});
  EXPECT_THROW(c.validate(), CorpusError);
  c.qa[0].evidence_turn_ids = {"s0:1"};
  EXPECT_NO_THROW(c.validate());
}

TEST(Corpus, MissingDirectoryIsIoError) {
  EXPECT_THROW(load_corpus("/nonexistent/corpus"), IoError);
}

TEST(Fixtures, CommittedFilesMatchGenerator) {
  const std::pair<const char*, synthetic::Fixture> all[] = {
      {"smoke", synthetic::smoke()}, {"golden", synthetic::golden()}, {"scaling", synthetic::scaling()}};
  for (const auto& [name, fx] : all) {
    const auto dir = testsupport::fixture(name);
    EXPECT_EQ(read(dir / "turns.jsonl"), to_jsonl(fx.corpus.turns)) << name;
    EXPECT_EQ(read(dir / "qa.jsonl"), to_jsonl(fx.corpus.qa)) << name;
    EXPECT_NO_THROW(load_corpus(dir).validate());
  }
}

TEST(Strategy, ParseAndName) {
  for (const char* s : {"semantic", "session", "fixed_window:256", "fixed_turns:3"}) {
    EXPECT_EQ(Strategy::parse(s).name(), s);
  }
  EXPECT_THROW(Strategy::parse("fixed_turns:0"), ValidationError);
  EXPECT_THROW(Strategy::parse("fixed_window"), ValidationError);
  EXPECT_THROW(Strategy::parse("random"), ValidationError);
}

TEST(Replay, SessionStrategyOneConsolidation) {
  const auto c = tiny(4);
  Engine e(EngineConfig{}, mock::make_bundle());
  const auto st = replay(c, e, Strategy::parse("session"));
  EXPECT_EQ(st.consolidations, 1u);
  EXPECT_EQ(st.cut_positions, std::vector<std::size_t>{3});
}

TEST(Replay, FixedTurnsThreeOverTen) {
  const auto c = tiny(10);
  Engine e(EngineConfig{}, mock::make_bundle());
  const auto st = replay(c, e, Strategy::parse("fixed_turns:3"));
  EXPECT_EQ(st.consolidations, 3u);
  EXPECT_EQ(st.cut_positions, (std::vector<std::size_t>{2, 5, 8}));
  EXPECT_EQ(e.snapshot()->active_buffer().size(), 1u);
}

TEST(Replay, FixedWindowCutsAtTokenCount) {
  const auto c = tiny(10);  // 4 tokens per turn
  Engine e(EngineConfig{}, mock::make_bundle());
  const auto st = replay(c, e, Strategy::parse("fixed_window:10"));
  EXPECT_EQ(st.cut_positions, (std::vector<std::size_t>{2, 5, 8}));
}

TEST(Replay, SemanticCutsAtPlantedShifts) {
  const auto fx = synthetic::smoke();
  Engine e(EngineConfig{}, mock::make_bundle());
  const auto st = replay(fx.corpus, e, Strategy{});
  // The final segment is still buffered after the session-end consolidation.
  EXPECT_EQ(st.cut_positions, fx.shifts);
}

TEST(Replay, GoldenSemanticMatchesShifts) {
  const auto fx = synthetic::golden();
  Engine e(EngineConfig{}, mock::make_bundle());
  const auto st = replay(fx.corpus, e, Strategy{});
  for (auto s : fx.shifts) {
    EXPECT_NE(std::find(st.cut_positions.begin(), st.cut_positions.end(), s), st.cut_positions.end()) << s;
  }
}

TEST(Replay, CutPointsStrategy) {
  const auto c = tiny(10);
  Engine e(EngineConfig{}, mock::make_bundle());
  const auto st = replay(c, e, Strategy::at_cut_points({1, 4, 9}));
  EXPECT_EQ(st.cut_positions, (std::vector<std::size_t>{1, 4, 9}));
}

TEST(Noise, ZeroIsIdentity) {
  const std::vector<std::size_t> b{3, 9, 14, 20};
  for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(inject_noise(b, {0.0, seed, false}, 30), b);
}

TEST(Noise, DeletionForcedAtOne) {
  const std::vector<std::size_t> b{100, 200, 300, 400};
  const auto out = inject_noise(b, {1.0, 4, true}, 1000);
  EXPECT_EQ(out.size(), 4u);
  for (auto x : b) EXPECT_EQ(std::count(out.begin(), out.end(), x), 0) << x;
  EXPECT_EQ(out, noise_oracle(b, 1.0, 4, true, 1000));
}

TEST(Noise, MatchesOracle) {
  const std::vector<std::size_t> b{5, 11, 17, 23, 29, 35, 41, 47, 53, 59};
  EXPECT_EQ(inject_noise(b, {0.4, 2024, false}, 64), noise_oracle(b, 0.4, 2024, false, 64));
  std::mt19937_64 rng(1);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 5 + rng() % 100;
    std::set<std::size_t> bs;
    for (std::size_t i = 0; i < rng() % 12; ++i) bs.insert(rng() % n);
    const std::vector<std::size_t> v(bs.begin(), bs.end());
    const double eta = (rng() % 5) / 10.0;
    const auto seed = rng();
    EXPECT_EQ(inject_noise(v, {eta, seed, false}, n), noise_oracle(v, eta, seed, false, n));
    EXPECT_EQ(inject_noise(v, {eta, seed, false}, n), inject_noise(v, {eta, seed, false}, n));
  }
}

TEST(Noise, Validation) {
  EXPECT_THROW(inject_noise({1}, {0.5, 0, false}, 10), ValidationError);
  EXPECT_THROW(inject_noise({1}, {-0.1, 0, false}, 10), ValidationError);
  EXPECT_NO_THROW(inject_noise({1}, {1.0, 0, true}, 10));
}

TEST(Metrics, F1AndBleu) {
  EXPECT_DOUBLE_EQ(token_f1("a red car", "a red car"), 1.0);
  EXPECT_DOUBLE_EQ(bleu1("a red car", "a red car"), 1.0);
  EXPECT_NEAR(token_f1("the red car", "red car"), 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(token_f1("", "red car"), 0.0);
  EXPECT_DOUBLE_EQ(token_f1("blue", "red car"), 0.0);
  // Clipped precision 2/2, brevity penalty exp(1 - 3/2).
  EXPECT_NEAR(bleu1("red car", "the red car"), std::exp(1.0 - 1.5), 1e-12);
  EXPECT_NEAR(bleu1("car car car", "red car"), 1.0 / 3.0, 1e-12);
}

TEST(Evaluate, RecallAndPurity) {
  const auto fx = synthetic::golden();
  Engine e(EngineConfig{}, mock::make_bundle());
  replay(fx.corpus, e, Strategy{});
  const auto h = e.snapshot()->hash();
  const auto m = evaluate(fx.corpus, e, 10);
  EXPECT_EQ(e.snapshot()->hash(), h);
  EXPECT_EQ(m.items, fx.corpus.qa.size());
  EXPECT_EQ(m.failures, 0u);
  EXPECT_DOUBLE_EQ(m.recall_at_k.at("overall"), 1.0);
  ASSERT_TRUE(m.f1);
  EXPECT_GT(*m.f1, 0.0);
  EXPECT_GT(m.usage.tokens_per_query, 0.0);
}

TEST(Evaluate, SingleEvidenceRecall) {
  DialogueCorpus c;
  c.turns.push_back(Turn{"s", 7, "Ann", "the kayak is orange", std::nullopt});
  c.qa.push_back(QaItem{"What color is the kayak?", "orange", Category::single_hop, {"s:7"}});
  Engine e(EngineConfig{}, mock::make_bundle());
  replay(c, e, Strategy::parse("session"));
  const auto m = evaluate(c, e, 10);
  EXPECT_DOUBLE_EQ(m.recall_at_k.at("overall"), 1.0);
  EXPECT_DOUBLE_EQ(m.recall_at_k.at("single_hop"), 1.0);
}

TEST(Evaluate, StrategiesShareRetrievalPath) {
  const auto fx = synthetic::golden();
  std::vector<std::map<std::string, std::size_t>> shapes;
  for (const char* s : {"semantic", "session", "fixed_turns:3"}) {
    auto p = mock::make_bundle();
    Engine e(EngineConfig{}, p);
    replay(fx.corpus, e, Strategy::parse(s));
    const auto start = p.call_log->size();
    evaluate(fx.corpus, e, 10);
    std::map<std::string, std::size_t> providers;
    for (const auto& r : p.call_log->entries_since(start)) ++providers[r.provider];
    EXPECT_EQ(providers.count("discriminator"), 0u);
    EXPECT_EQ(providers.count("summarizer"), 0u);
    EXPECT_EQ(providers.count("relation_scorer"), 0u);
    EXPECT_EQ(providers["embedder"], fx.corpus.qa.size());
    EXPECT_EQ(providers["answerer"], fx.corpus.qa.size());
  }
}

TEST(Scaling, MonotoneCounts) {
  const auto c = load_corpus(testsupport::fixture("scaling"));
  Engine e(EngineConfig{}, mock::make_bundle());
  const auto rows = scaling_report(c, e, Strategy{}, {3, 15, 27});
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].event_nodes, rows[i - 1].event_nodes);
    EXPECT_GE(rows[i].topic_nodes, rows[i - 1].topic_nodes);
    EXPECT_GE(rows[i].edges, rows[i - 1].edges);
    EXPECT_GE(rows[i].qa_items, rows[i - 1].qa_items);
  }
  for (const auto& r : rows) EXPECT_EQ(r.edges, r.topic_edges + r.sequential_edges + r.cross_links);
}

TEST(Criteria, ParseAndCheck) {
  const auto cs = parse_criteria("# comment\nsemantic.recall_at_k >= session.recall_at_k\nsession.f1 < 0.5\n");
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0].rhs_row, "session");
  nlohmann::json report{{"rows",
                         {{{"name", "semantic"}, {"recall_at_k", 0.9}, {"f1", 0.4}},
                          {{"name", "session"}, {"recall_at_k", 0.8}, {"f1", 0.6}}}}};
  const auto v = check_criteria(report, cs);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("session.f1"), std::string::npos);
  EXPECT_EQ(check_criteria(report, parse_criteria("missing.f1 > 0")).size(), 1u);
  EXPECT_THROW(parse_criteria("nonsense"), ValidationError);
}

TEST(Table, Format) {
  nlohmann::json report{{"columns", {"name", "f1"}},
                        {"rows", {{{"name", "semantic"}, {"f1", 0.5}}, {{"name", "x"}, {"f1", 1}}}}};
  const auto t = format_table(report);
  EXPECT_NE(t.find("semantic  0.5000"), std::string::npos);
}
