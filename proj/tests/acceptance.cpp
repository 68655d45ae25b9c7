// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hgmem/consolidation.hpp"
#include "hgmem/engine.hpp"
#include "hgmem/errors.hpp"
#include "hgmem/harness.hpp"
#include "hgmem/mock_providers.hpp"
#include "hgmem/retrieval.hpp"
#include "hgmem/store.hpp"
#include "hgmem/text.hpp"
#include "support.hpp"

using namespace hgmem;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("hgmem_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int cli(const std::string& args, std::string* output = nullptr) {
  const std::string cmd = std::string(HGMEM_CLI) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = ::pclose(pipe);
  if (output) *output = out;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

struct RelevanceTable : RelevanceScorer {
  std::map<std::string, double, std::less<>> p;
  double relevance(std::string_view, std::string_view c) override { return p.find(c)->second; }
};

// 1 ----------------------------------------------------------------------

Outcome write_isolation() {
  std::mt19937_64 rng(1);
  auto p = mock::make_bundle();
  EngineConfig config;
  config.buffer_token_limit = 1'000'000;
  Engine engine(testsupport::random_snapshot(rng, 40, 0.15, config), p);
  const auto before = sha256_hex(engine.snapshot()->topic_layer_bytes());
  const std::size_t appends = 1000;
  for (std::size_t i = 0; i < appends; ++i) {
    engine.ingest(testsupport::utterance("s" + std::to_string(i % 3), "Ann", testsupport::random_text(rng)));
    if (sha256_hex(engine.snapshot()->topic_layer_bytes()) != before) {
      return fail("topic layer changed after append " + std::to_string(i));
    }
  }
  if (p.call_log->size() != 0) return fail("providers were called without a trigger");
  return {true, std::to_string(appends) + " appends, topic-layer hash " + before.substr(0, 12) + " unchanged"};
}

// 2 ----------------------------------------------------------------------

Outcome consolidation_atomicity() {
  const auto corpus = harness::load_corpus(testsupport::fixture("golden"));
  Engine engine(EngineConfig{}, mock::make_bundle());
  const auto stats = harness::replay(corpus, engine, harness::Strategy{});
  const auto final_snap = engine.snapshot();
  const auto n = stats.consolidations;
  if (final_snap->topic_graph().size() != n || final_snap->archives().size() != n ||
      final_snap->cross_index().size() != n) {
    return fail("counts differ from " + std::to_string(n) + " consolidations");
  }

  MemorySnapshot state(EngineConfig{});
  std::size_t fault_points = 0, runs = 0, aborted = 0, committed = 0;
  for (const auto& m : engine.mutation_log()) {
    if (m.kind == Mutation::Kind::append) {
      state.append_event(m.utterance);
      continue;
    }
    const auto pre = state.serialize();
    auto counter = std::make_shared<testsupport::FaultPlan>(0, false);
    const auto clean = consolidate_segment(state, m.segment_length, testsupport::faulty(mock::make_bundle(), counter),
                                           m.forced);
    const auto post = clean.snapshot.serialize();
    fault_points += counter->calls();
    for (std::size_t at = 1; at <= counter->calls(); ++at) {
      for (bool persistent : {false, true}) {
        ++runs;
        auto plan = std::make_shared<testsupport::FaultPlan>(at, persistent);
        try {
          const auto r = consolidate_segment(state, m.segment_length,
                                             testsupport::faulty(mock::make_bundle(), plan), m.forced);
          if (r.snapshot.serialize() != post) {
            return fail("fault at call " + std::to_string(at) + " committed a state other than the post-state");
          }
          ++committed;
        } catch (const ConsolidationAborted&) {
          ++aborted;
        }
        if (state.serialize() != pre) return fail("pre-state modified by a faulted transaction");
      }
    }
    state = clean.snapshot;
  }
  if (state.serialize() != final_snap->serialize()) return fail("step-wise replay diverged from the engine");
  return {true, std::to_string(n) + " consolidations; " + std::to_string(fault_points) + " fault points, " +
                    std::to_string(runs) + " faulted runs: " + std::to_string(aborted) + " exact pre-state, " +
                    std::to_string(committed) + " exact post-state"};
}

// 3 ----------------------------------------------------------------------

Outcome rerank_oracle() {
  std::mt19937_64 rng(3);
  const EngineConfig config;
  auto p = mock::make_bundle();
  auto table = std::make_shared<RelevanceTable>();
  p.relevance_scorer = table;
  const char* speakers[] = {"Ann", "Ben", "Cat"};
  double worst = 0.0;
  std::size_t ties = 0;
  for (int round = 0; round < 1000; ++round) {
    const std::size_t n = 1 + rng() % 50;
    table->p.clear();
    std::vector<Candidate> cands;
    std::vector<std::uint64_t> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(i + 1);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      EventNode e;
      e.id = EventId{ids[i]};
      e.speaker = speakers[rng() % 3];
      e.text = "item" + std::to_string(i);
      e.confidence_flag = rng() % 2;
      if (rng() % 2) e.timestamp = "2024-03-01T12:00:00Z";
      table->p[e.text] = (1 + rng() % 10) / 10.0;
      cands.push_back(Candidate{e, std::nullopt, std::nullopt});
    }
    Query q{"what did ann mention"};
    q.time_sensitive = rng() % 2 == 0;

    struct Row {
      std::uint64_t id;
      double score;
    };
    std::vector<Row> oracle;
    for (const auto& c : cands) {
      const int it = (*q.time_sensitive && c.node.timestamp) ? 1 : 0;
      const int ic = c.node.confidence_flag ? 1 : 0;
      const int ir = c.node.speaker == "Ann" ? 1 : 0;
      const double s = table->p[c.node.text] * std::pow(config.beta_time, it) * std::pow(config.beta_conf, ic) *
                       std::pow(config.beta_role, ir);
      oracle.push_back({c.node.id.value, s});
    }
    std::sort(oracle.begin(), oracle.end(), [](const Row& a, const Row& b) {
      return a.score != b.score ? a.score > b.score : a.id > b.id;
    });
    for (std::size_t i = 1; i < n; ++i) ties += oracle[i].score == oracle[i - 1].score;

    const auto got = rerank(q, cands, p, config, n);
    if (got.ranked.size() != n) return fail("ranked list truncated");
    for (std::size_t i = 0; i < n; ++i) {
      if (got.ranked[i].event_node_id.value != oracle[i].id) {
        return fail("round " + std::to_string(round) + ": order differs at rank " + std::to_string(i + 1));
      }
      worst = std::max(worst, std::abs(got.ranked[i].score - oracle[i].score));
    }
  }
  if (worst > 1e-12) return fail("score delta " + num(worst));
  return {true, "1000 sets, max score delta " + num(worst) + ", " + std::to_string(ties) + " tied neighbours resolved"};
}

// 4 ----------------------------------------------------------------------

Outcome traversal_oracle() {
  std::mt19937_64 rng(4);
  std::size_t total_anchor = 0, total_cands = 0;
  for (int round = 0; round < 100; ++round) {
    const std::size_t topics = 1 + rng() % 200;
    const auto s = testsupport::random_snapshot(rng, topics, 4.0 / static_cast<double>(topics));
    const auto q = testsupport::random_unit(rng, 64);
    const std::size_t k = 1 + rng() % 15;

    std::vector<std::pair<double, std::uint64_t>> scan;
    for (const auto& n : s.topic_graph().nodes()) {
      double d = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) d += q[i] * n.embedding[i];
      scan.push_back({-d, n.id.value});
    }
    std::sort(scan.begin(), scan.end());
    std::set<std::uint64_t> seeds;
    for (std::size_t i = 0; i < std::min(k, scan.size()); ++i) seeds.insert(scan[i].second);
    std::set<std::uint64_t> anchors = seeds;
    for (const auto& e : s.topic_graph().edges()) {
      if (seeds.count(e.from_id.value)) anchors.insert(e.to_id.value);
      if (seeds.count(e.to_id.value)) anchors.insert(e.from_id.value);
    }
    std::set<std::uint64_t> events;
    for (auto t : anchors) {
      for (const auto& n : s.archive(s.cross_index().at(TopicId{t})).nodes()) events.insert(n.id.value);
    }

    const auto a = anchor(s.topic_graph(), q, k);
    std::vector<std::uint64_t> got_anchor;
    for (auto id : a.ids()) got_anchor.push_back(id.value);
    if (got_anchor != std::vector<std::uint64_t>(anchors.begin(), anchors.end())) {
      return fail("round " + std::to_string(round) + ": anchor set differs");
    }
    const auto c = drill_down(s, a, false);
    std::vector<std::uint64_t> got_events;
    for (const auto& x : c) got_events.push_back(x.node.id.value);
    if (got_events != std::vector<std::uint64_t>(events.begin(), events.end())) {
      return fail("round " + std::to_string(round) + ": candidate set differs");
    }
    total_anchor += anchors.size();
    total_cands += events.size();
  }
  return {true, "100 snapshots, " + std::to_string(total_anchor) + " anchors and " + std::to_string(total_cands) +
                    " candidates matched"};
}

// 5 ----------------------------------------------------------------------

Outcome constants_pinned() {
  const EngineConfig c;
  const json pinned = json::parse(R"({
    "buffer_token_limit": 2048, "k_cand": 5, "retrieval_k": 10,
    "beta_time": 1.4, "beta_role": 1.4, "beta_conf": 1.2
  })");
  const auto actual = to_json(c);
  for (const auto& [key, value] : pinned.items()) {
    if (!actual.contains(key) || actual[key] != value) {
      return fail(key + " = " + (actual.contains(key) ? actual[key].dump() : "missing") + ", expected " + value.dump());
    }
  }
  if (c.retrieval_k != 10 || c.k_cand != 5 || c.buffer_token_limit != 2048 || c.beta_time != 1.4 ||
      c.beta_role != 1.4 || c.beta_conf != 1.2) {
    return fail("struct defaults drifted");
  }
  return {true, "k=10 beta_time=1.4 beta_role=1.4 beta_conf=1.2 k_cand=5 buffer=2048"};
}

// 6 ----------------------------------------------------------------------

Outcome beta_properties() {
  std::mt19937_64 rng(6);
  std::size_t pairs = 0;
  for (int round = 0; round < 2000; ++round) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<ScoringInput> in;
    for (std::size_t i = 0; i < n; ++i) {
      in.push_back({EventId{1 + rng() % 60}, (1 + rng() % 6) / 6.0,
                    Indicators{int(rng() % 2), int(rng() % 2), int(rng() % 2)}});
    }
    EngineConfig unit;
    unit.beta_time = unit.beta_role = unit.beta_conf = 1.0;
    std::vector<std::size_t> by_p(n);
    for (std::size_t i = 0; i < n; ++i) by_p[i] = i;
    std::stable_sort(by_p.begin(), by_p.end(), [&](std::size_t a, std::size_t b) {
      if (in[a].p_sem != in[b].p_sem) return in[a].p_sem > in[b].p_sem;
      return in[a].id > in[b].id;
    });
    if (rank_order(in, unit) != by_p) return fail("identity violated in round " + std::to_string(round));

    for (int factor = 0; factor < 3; ++factor) {
      EngineConfig lo;
      lo.beta_time = 1.0 + (rng() % 10) / 10.0;
      lo.beta_conf = 1.0 + (rng() % 10) / 10.0;
      lo.beta_role = 1.0 + (rng() % 10) / 10.0;
      EngineConfig hi = lo;
      double& raised = factor == 0 ? hi.beta_time : factor == 1 ? hi.beta_conf : hi.beta_role;
      raised += 0.05 + (rng() % 10) / 10.0;
      auto ind = [&](std::size_t i) {
        return factor == 0 ? in[i].indicators.time : factor == 1 ? in[i].indicators.conf : in[i].indicators.role;
      };
      auto positions = [&](const EngineConfig& c) {
        std::vector<std::size_t> pos(n);
        const auto order = rank_order(in, c);
        for (std::size_t r = 0; r < n; ++r) pos[order[r]] = r;
        return pos;
      };
      const auto before = positions(lo), after = positions(hi);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (ind(i) != 1 || ind(j) != 0 || in[i].p_sem != in[j].p_sem) continue;
          ++pairs;
          if (before[i] < before[j] && after[i] > after[j]) {
            return fail("raising a beta demoted an indicator-1 candidate");
          }
        }
      }
    }
  }
  return {true, "2000 identity checks, " + std::to_string(pairs) + " equal-p_sem pairs monotone"};
}

// 7, 8 -------------------------------------------------------------------

struct ScalingReplay {
  harness::DialogueCorpus corpus;
  std::shared_ptr<CallLog> log;
  std::vector<ConsolidationReport> reports;
  std::size_t session_ends = 0;
  std::size_t overflow_oracle = 0;
  std::size_t discriminator_calls = 0;
};

ScalingReplay scaling_replay(std::int64_t buffer_limit) {
  ScalingReplay out;
  out.corpus = harness::load_corpus(testsupport::fixture("scaling"));
  auto p = mock::make_bundle();
  out.log = p.call_log;
  EngineConfig config;
  config.buffer_token_limit = buffer_limit;
  Engine engine(config, p);
  const auto& turns = out.corpus.turns;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const bool end = i + 1 == turns.size() || turns[i + 1].session_id != turns[i].session_id;
    const auto before = engine.snapshot()->active_buffer().token_total();
    const bool overflow = before + text::estimate_tokens(turns[i].text) > static_cast<std::uint64_t>(buffer_limit);
    out.overflow_oracle += overflow;
    const auto r = engine.ingest(Utterance{turns[i].session_id, turns[i].speaker, turns[i].text, turns[i].timestamp,
                                           turns[i].turn_index},
                                 end);
    out.reports.insert(out.reports.end(), r.reports.begin(), r.reports.end());
    // A session end finds nothing to check only when a forced overflow split
    // has just drained the buffer; any real session-end split keeps a suffix.
    out.session_ends += end && !(overflow && engine.snapshot()->active_buffer().empty());
  }
  out.discriminator_calls = out.log->count(provider_name::discriminator);
  return out;
}

Outcome cost_bound() {
  const auto r = scaling_replay(2048);
  std::size_t worst = 0;
  for (const auto& rep : r.reports) {
    worst = std::max(worst, rep.relation_calls);
    if (rep.relation_calls > 5) return fail("a consolidation made " + std::to_string(rep.relation_calls) + " calls");
  }
  // Cross-check the reports against the raw log.
  std::size_t from_reports = 0;
  for (const auto& rep : r.reports) from_reports += rep.relation_calls;
  if (from_reports != r.log->count(provider_name::relation_scorer)) return fail("reports disagree with call log");
  return {true, std::to_string(r.reports.size()) + " consolidations, max relation calls " + std::to_string(worst)};
}

Outcome discriminator_sparsity() {
  std::string detail;
  for (std::int64_t limit : {2048, 40}) {
    const auto r = scaling_replay(limit);
    if (r.discriminator_calls != r.session_ends + r.overflow_oracle) {
      return fail("limit " + std::to_string(limit) + ": " + std::to_string(r.discriminator_calls) + " calls vs " +
                  std::to_string(r.session_ends) + " session ends + " + std::to_string(r.overflow_oracle) +
                  " overflows");
    }
    if (!detail.empty()) detail += "; ";
    detail += "limit " + std::to_string(limit) + ": " + std::to_string(r.discriminator_calls) + " = " +
              std::to_string(r.session_ends) + " + " + std::to_string(r.overflow_oracle);
  }
  return {true, detail};
}

// 9 ----------------------------------------------------------------------

double oracle_recall(const harness::DialogueCorpus& corpus, const std::string& strategy, std::size_t k) {
  Engine engine(EngineConfig{}, mock::make_bundle());
  harness::replay(corpus, engine, harness::Strategy::parse(strategy));
  double sum = 0.0;
  for (const auto& qa : corpus.qa) {
    const auto r = engine.query(Query{qa.question}, k);
    std::set<std::string> got;
    for (const auto& c : r.ranked) got.insert(c.session_id + ":" + std::to_string(c.turn_index));
    std::size_t hit = 0;
    for (const auto& e : qa.evidence_turn_ids) hit += got.count(e);
    sum += static_cast<double>(hit) / static_cast<double>(qa.evidence_turn_ids.size());
  }
  return sum / static_cast<double>(corpus.qa.size());
}

Outcome partitioning_matrix() {
  const auto report = scratch() / "matrix.json";
  const std::string strategies = "semantic,session,fixed_window:256,fixed_window:512,fixed_turns:3,fixed_turns:5";
  std::string out;
  const int code = cli("eval --corpus " + testsupport::fixture("golden").string() + " --strategy " + strategies +
                           " --k 10 --report " + report.string(),
                       &out);
  if (code != 0) return fail("eval exited " + std::to_string(code) + ": " + out);
  const auto j = json::parse(read(report));
  if (j["rows"].size() != 6) return fail("expected 6 rows");
  if (!fs::exists(scratch() / "matrix.txt") || read(scratch() / "matrix.txt").empty()) return fail("no table");
  const auto corpus = harness::load_corpus(testsupport::fixture("golden"));
  std::map<std::string, double> reported;
  for (const auto& row : j["rows"]) reported[row["name"]] = row["recall_at_k"].get<double>();
  const double sem = oracle_recall(corpus, "semantic", 10);
  const double ses = oracle_recall(corpus, "session", 10);
  if (std::abs(sem - reported["semantic"]) > 1e-12 || std::abs(ses - reported["session"]) > 1e-12) {
    return fail("reported recall differs from oracle");
  }
  if (!(sem >= ses)) return fail("semantic recall " + num(sem) + " < session recall " + num(ses));
  return {true, "6-row table; recall@10 semantic " + num(sem) + " >= session " + num(ses)};
}

// 10 ---------------------------------------------------------------------

std::vector<std::size_t> noise_oracle(std::vector<std::size_t> b, double eta, std::uint64_t seed, std::size_t n) {
  std::sort(b.begin(), b.end());
  std::mt19937_64 g(seed);
  std::set<std::size_t> out;
  for (auto x : b) {
    if (std::ldexp(static_cast<double>(g() >> 11), -53) >= eta) {
      out.insert(x);
    } else if (g() % 2 == 1) {
      const long long d[] = {-2, -1, 1, 2};
      const long long y = static_cast<long long>(x) + d[g() % 4];
      out.insert(static_cast<std::size_t>(std::clamp(y, 0LL, static_cast<long long>(n) - 1)));
    }
  }
  for (long long i = 0; i < std::llround(eta * static_cast<double>(b.size())); ++i) {
    while (!out.insert(static_cast<std::size_t>(g() % n)).second) {
    }
  }
  return {out.begin(), out.end()};
}

Outcome noise_sweep() {
  const auto report = scratch() / "noise.json";
  std::string out;
  const int code = cli("eval --corpus " + testsupport::fixture("golden").string() +
                           " --noise 0,0.1,0.2,0.3,0.4 --seed 11 --report " + report.string(),
                       &out);
  if (code != 0) return fail("eval exited " + std::to_string(code) + ": " + out);
  const auto j = json::parse(read(report));
  const auto corpus = harness::load_corpus(testsupport::fixture("golden"));
  const auto reference = j["reference_boundaries"].get<std::vector<std::size_t>>();
  if (j["rows"].size() != 5) return fail("expected 5 rows");
  std::string detail;
  for (const auto& row : j["rows"]) {
    const double eta = row["eta"];
    const auto expect = noise_oracle(reference, eta, 11, corpus.turns.size());
    if (row["perturbed_boundaries"].get<std::vector<std::size_t>>() != expect) {
      return fail("eta " + num(eta) + ": perturbed set differs from the oracle");
    }
    if (row["failures"].get<int>() != 0) return fail("eta " + num(eta) + ": evaluation failures");
    detail += (detail.empty() ? "" : ", ") + std::string("eta ") + num(eta) + " f1 " + num(row["f1"].get<double>());
  }
  if (j["rows"][0]["perturbed_boundaries"].get<std::vector<std::size_t>>() != reference) {
    return fail("eta 0 is not the identity");
  }
  return {true, detail};
}

// 11 ---------------------------------------------------------------------

Outcome scaling_telemetry() {
  const auto report = scratch() / "scaling.json";
  std::string out;
  const int code = cli("eval --corpus " + testsupport::fixture("scaling").string() +
                           " --checkpoints 3,15,27 --report " + report.string(),
                       &out);
  if (code != 0) return fail("eval exited " + std::to_string(code) + ": " + out);
  const auto j = json::parse(read(report));
  if (j["rows"].size() != 3) return fail("expected 3 checkpoint rows");
  for (const char* col : {"sessions", "event_nodes", "topic_nodes", "edges", "tokens_per_query", "latency_s"}) {
    for (const auto& row : j["rows"]) {
      if (!row.contains(col)) return fail(std::string("row lacks ") + col);
    }
  }
  const double first = j["rows"][0]["tokens_per_query"], last = j["rows"][2]["tokens_per_query"];
  if (!(last <= 2.0 * first)) return fail("tokens/query grew from " + num(first) + " to " + num(last));
  std::string detail;
  for (const auto& row : j["rows"]) {
    detail += (detail.empty() ? "" : "; ") + std::to_string(row["sessions"].get<int>()) + " sessions: " +
              std::to_string(row["event_nodes"].get<int>()) + " events, " +
              std::to_string(row["topic_nodes"].get<int>()) + " topics, " + num(row["tokens_per_query"]) + " tok/q";
  }
  return {true, detail + "; ratio " + num(last / first)};
}

// 12 ---------------------------------------------------------------------

Outcome determinism_persistence() {
  const auto golden = testsupport::fixture("golden").string();
  for (int i = 0; i < 2; ++i) {
    const auto t = std::to_string(i);
    if (cli("ingest --seed 42 --corpus " + golden + " --snapshot-out " + (scratch() / ("det" + t + ".json")).string() +
            " --report " + (scratch() / ("det" + t + "_ingest.json")).string()) != 0) {
      return fail("ingest failed");
    }
    if (cli("eval --seed 42 --corpus " + golden + " --strategy semantic,session --report " +
            (scratch() / ("det" + t + "_eval.json")).string()) != 0) {
      return fail("eval failed");
    }
  }
  for (const char* f : {".json", "_ingest.json", "_eval.json", "_eval.txt"}) {
    if (read(scratch() / ("det0" + std::string(f))) != read(scratch() / ("det1" + std::string(f)))) {
      return fail(std::string("runs differ in ") + f);
    }
  }

  const auto snap = store::load(scratch() / "det0.json");
  const auto copy = scratch() / "roundtrip.json";
  store::save(snap, copy);
  if (store::load(copy).hash() != snap.hash()) return fail("round trip changed the hash");

  const auto bytes = read(copy);
  std::mt19937_64 rng(12);
  std::size_t rejected = 0, equivalent = 0;
  for (int i = 0; i < 1000; ++i) {
    auto m = bytes;
    m[rng() % m.size()] = static_cast<char>(rng() % 256);
    try {
      if (store::decode(m).hash() != snap.hash()) return fail("mutated file loaded as a different snapshot");
      ++equivalent;
    } catch (const CorruptionError&) {
      ++rejected;
    } catch (const std::exception& e) {
      return fail(std::string("untyped failure: ") + e.what());
    }
  }
  return {true, "byte-identical snapshots and reports; round-trip hash " + snap.hash().substr(0, 12) +
                    "; fuzz: " + std::to_string(rejected) + " typed rejections, " + std::to_string(equivalent) +
                    " load-equivalent"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"write isolation", write_isolation},
      {"consolidation arithmetic and atomicity", consolidation_atomicity},
      {"re-ranking oracle equivalence", rerank_oracle},
      {"graph traversal oracle equivalence", traversal_oracle},
      {"default constants pinned", constants_pinned},
      {"beta identity and monotonicity", beta_properties},
      {"coarse-to-fine cost bound", cost_bound},
      {"discriminator sparsity", discriminator_sparsity},
      {"partitioning protocol", partitioning_matrix},
      {"noise protocol", noise_sweep},
      {"scaling telemetry", scaling_telemetry},
      {"determinism and persistence", determinism_persistence},
  };
  const double budget[] = {5, 30, 10, 20, 1, 5, 60, 60, 60, 60, 60, 60};
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > budget[index - 1]) o = fail("took " + num(secs) + " s, budget " + num(budget[index - 1]) + " s");
    failed += !o.pass;
    std::printf("criterion %2d %s: %s (%.2fs) %s\n", index, o.pass ? "PASS" : "FAIL", name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(scratch(), ec);
  return failed;
}
