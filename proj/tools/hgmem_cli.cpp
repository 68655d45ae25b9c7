// Command-line front end: ingest, query, eval, inspect.
//
// Exit codes: 0 ok, 1 criteria violated, 2 usage, I/O or runtime error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hgmem/engine.hpp"
#include "hgmem/errors.hpp"
#include "hgmem/harness.hpp"
#include "hgmem/http_providers.hpp"
#include "hgmem/mock_providers.hpp"
#include "hgmem/store.hpp"

namespace {

using nlohmann::json;
using namespace hgmem;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kFailure = 2;

struct Common {
  std::string provider = "mock";
  std::uint64_t seed = 0;
  std::string config_path;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--provider", c.provider, "Model providers: mock or http")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Seed for the mock providers")->capture_default_str();
  cmd->add_option("--config", c.config_path, "Key-value config file (engine defaults, http.* endpoints)");
}

KeyValueConfig load_kv(const Common& c) {
  return c.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(c.config_path);
}

ProviderBundle make_providers(const Common& c, const KeyValueConfig& kv, const EngineConfig& config) {
  const auto dim = static_cast<std::size_t>(config.embedding_dim);
  const auto provider = kv.contains("provider") && c.provider == "mock" ? kv.get("provider", "mock") : c.provider;
  if (provider == "http") return http::make_bundle(http::HttpConfig::from(kv), dim);
  if (provider != "mock") throw ValidationError("unknown provider '" + provider + "'");
  mock::Options o;
  o.embedding_dim = dim;
  o.seed = c.seed;
  return mock::make_bundle(o);
}

void write_text(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << bytes;
  if (!out) throw IoError("short write to " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

void print_report(std::size_t n, const ConsolidationReport& r) {
  std::printf("consolidation %zu: topic %llu archive %llu segment %zu candidates %zu relation_calls %zu "
              "accepted_edges %zu forced %s degraded %s tokens %llu/%llu\n",
              n, static_cast<unsigned long long>(r.new_topic_id.value),
              static_cast<unsigned long long>(r.archive_id.value), r.segment_length, r.candidate_pool.size(),
              r.relation_calls, r.accepted_edges, r.forced ? "true" : "false", r.degraded ? "true" : "false",
              static_cast<unsigned long long>(r.provider_tokens.input),
              static_cast<unsigned long long>(r.provider_tokens.output));
}

// ---- ingest

struct IngestArgs {
  Common common;
  std::string corpus;
  std::string strategy = "semantic";
  std::string snapshot_out;
  std::string report;
};

int run_ingest(const IngestArgs& a) {
  const auto kv = load_kv(a.common);
  const auto config = kv.apply_to(EngineConfig{});
  const auto strategy = harness::Strategy::parse(a.strategy);
  const auto corpus = harness::load_corpus(a.corpus);
  Engine engine(config, make_providers(a.common, kv, config));
  const auto stats = harness::replay(corpus, engine, strategy);

  std::printf("strategy %s\n", strategy.name().c_str());
  const auto& reports = engine.telemetry().reports;
  for (std::size_t i = 0; i < reports.size(); ++i) print_report(i + 1, reports[i]);
  const auto snap = engine.snapshot();
  std::printf("turns %zu sessions %zu consolidations %zu aborted %zu topic_nodes %zu live_events %zu\n",
              stats.turns, stats.sessions, stats.consolidations, stats.aborted, snap->topic_graph().size(),
              snap->active_buffer().size());
  store::save(*snap, a.snapshot_out);
  std::printf("snapshot %s hash %s\n", a.snapshot_out.c_str(), snap->hash().c_str());

  if (!a.report.empty()) {
    json triggers = json::object();
    for (const auto& [kind, count] : engine.telemetry().triggers) triggers[std::string(to_string(kind))] = count;
    json list = json::array();
    for (const auto& r : reports) list.push_back(to_json(r));
    json doc{{"strategy", strategy.name()},
             {"turns", stats.turns},
             {"sessions", stats.sessions},
             {"consolidations", list},
             {"aborted", stats.aborted},
             {"triggers", triggers},
             {"snapshot_hash", snap->hash()}};
    write_text(a.report, doc.dump(2) + "\n");
  }
  return kOk;
}

// ---- query

struct QueryArgs {
  Common common;
  std::string snapshot;
  std::string text;
  std::size_t k = 0;
  bool explain = false;
  bool as_json = false;
  std::vector<std::string> speakers;
  std::string time_sensitive;
};

int run_query(const QueryArgs& a) {
  if (a.text.empty()) throw ValidationError("--text must not be empty");
  const auto kv = load_kv(a.common);
  auto snapshot = store::load(a.snapshot);
  const auto config = snapshot.config();
  Engine engine(std::move(snapshot), make_providers(a.common, kv, config));

  Query q;
  q.text = a.text;
  q.target_speakers = a.speakers;
  if (a.time_sensitive == "true") q.time_sensitive = true;
  if (a.time_sensitive == "false") q.time_sensitive = false;
  const auto res = engine.query(q, a.k);

  if (a.as_json) {
    json ranked = json::array();
    for (const auto& c : res.ranked) ranked.push_back(to_json(c));
    json doc{{"query", a.text}, {"candidates", res.candidate_count}, {"degraded", res.degraded}, {"ranked", ranked}};
    std::printf("%s\n", doc.dump(2).c_str());
    return kOk;
  }
  std::printf("anchors %zu (seeds %zu) candidates %zu%s\n", res.anchors.ids().size(), res.anchors.seeds.size(),
              res.candidate_count, res.degraded ? " degraded" : "");
  for (const auto& c : res.ranked) {
    std::printf("%2zu. %s  [%s:%llu] %s: %s\n", c.rank, fmt("%.6f", c.score).c_str(), c.session_id.c_str(),
                static_cast<unsigned long long>(c.turn_index), c.speaker.c_str(), c.text.c_str());
    if (a.explain) {
      auto factor = [](double beta, int on) { return on ? beta : 1.0; };
      std::printf("      p_sem %s  time %d x%s  conf %d x%s  role %d x%s  event %llu archive %s anchor %s\n",
                  fmt("%.6f", c.p_sem).c_str(), c.indicators.time,
                  fmt("%.2f", factor(config.beta_time, c.indicators.time)).c_str(), c.indicators.conf,
                  fmt("%.2f", factor(config.beta_conf, c.indicators.conf)).c_str(), c.indicators.role,
                  fmt("%.2f", factor(config.beta_role, c.indicators.role)).c_str(),
                  static_cast<unsigned long long>(c.event_node_id.value),
                  c.source_archive_id ? to_string(*c.source_archive_id).c_str() : "live",
                  c.anchor_topic_id ? to_string(*c.anchor_topic_id).c_str() : "live");
    }
  }
  return kOk;
}

// ---- eval

struct EvalArgs {
  Common common;
  std::string corpus;
  std::vector<std::string> strategies{"semantic"};
  std::vector<double> noise;
  std::string report;
  std::string criteria;
  std::vector<std::size_t> checkpoints;
  std::size_t k = 0;
};

std::vector<std::string> split_strategies(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& s : in) {
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

int run_eval(const EvalArgs& a) {
  const auto kv = load_kv(a.common);
  const auto config = kv.apply_to(EngineConfig{});
  const auto corpus = harness::load_corpus(a.corpus);
  const auto names = split_strategies(a.strategies);
  if (names.empty()) throw ValidationError("--strategy needs at least one value");
  std::vector<harness::Strategy> strategies;
  for (const auto& n : names) strategies.push_back(harness::Strategy::parse(n));
  std::vector<harness::Criterion> criteria;
  if (!a.criteria.empty()) criteria = harness::parse_criteria(read_text(a.criteria));

  json report{{"corpus", a.corpus},
              {"provider", a.common.provider},
              {"seed", a.common.seed},
              {"k", a.k ? a.k : static_cast<std::size_t>(config.retrieval_k)}};
  auto fresh_engine = [&] { return Engine(config, make_providers(a.common, kv, config)); };

  if (!a.checkpoints.empty()) {
    auto engine = fresh_engine();
    const auto rows = harness::scaling_report(corpus, engine, strategies.front(), a.checkpoints);
    report["kind"] = "scaling";
    report["strategy"] = strategies.front().name();
    report["checkpoints"] = a.checkpoints;
    report["columns"] = {"sessions", "event_nodes", "topic_nodes", "edges", "topic_edges", "cross_links",
                         "tokens_per_query", "latency_s", "f1", "recall_at_k"};
    report["rows"] = harness::scaling_rows(rows);
  } else if (!a.noise.empty()) {
    auto reference_engine = fresh_engine();
    const auto reference = harness::replay(corpus, reference_engine, harness::Strategy{});
    report["kind"] = "noise";
    report["noise"] = {{"etas", a.noise}, {"seed", a.common.seed}};
    report["reference_boundaries"] = reference.cut_positions;
    report["columns"] = {"name", "eta", "boundaries", "consolidations", "topic_nodes", "recall_at_k", "f1",
                         "bleu1", "tokens_per_query", "failures"};
    report["rows"] = json::array();
    for (double eta : a.noise) {
      harness::NoiseSpec spec{eta, a.common.seed, false};
      const auto cuts = harness::inject_noise(reference.cut_positions, spec, corpus.turns.size());
      auto engine = fresh_engine();
      const auto stats =
          harness::replay(corpus, engine, harness::Strategy::at_cut_points({cuts.begin(), cuts.end()}));
      const auto m = harness::evaluate(corpus, engine, a.k);
      auto row = harness::metrics_row("eta=" + fmt("%g", eta), m, stats, *engine.snapshot());
      row["eta"] = eta;
      row["seed"] = a.common.seed;
      row["boundaries"] = cuts.size();
      row["perturbed_boundaries"] = cuts;
      report["rows"].push_back(row);
    }
  } else {
    report["kind"] = "strategy_matrix";
    report["columns"] = {"name", "consolidations", "topic_nodes", "recall_at_k", "recall_single_hop",
                         "recall_multi_hop", "recall_temporal", "recall_open_domain", "f1", "bleu1",
                         "tokens_per_query", "latency_s", "failures"};
    report["rows"] = json::array();
    for (const auto& s : strategies) {
      auto engine = fresh_engine();
      const auto stats = harness::replay(corpus, engine, s);
      const auto m = harness::evaluate(corpus, engine, a.k);
      report["rows"].push_back(harness::metrics_row(s.name(), m, stats, *engine.snapshot()));
    }
  }

  const auto table = harness::format_table(report);
  std::printf("%s", table.c_str());
  if (!a.report.empty()) {
    write_text(a.report, report.dump(2) + "\n");
    auto txt = a.report;
    const auto dot = txt.rfind('.');
    txt = (dot == std::string::npos || txt.find('/', dot) != std::string::npos ? txt : txt.substr(0, dot)) + ".txt";
    write_text(txt, table);
  }

  if (!a.criteria.empty()) {
    const auto violations = harness::check_criteria(report, criteria);
    for (const auto& v : violations) std::fprintf(stderr, "criteria violated: %s\n", v.c_str());
    if (!violations.empty()) return kViolation;
    std::printf("criteria: all satisfied\n");
  }
  return kOk;
}

// ---- inspect

struct InspectArgs {
  std::string snapshot;
  std::optional<std::uint64_t> topic;
  std::optional<std::uint64_t> archive;
  bool stats = false;
};

int run_inspect(const InspectArgs& a) {
  const auto snap = store::load(a.snapshot);
  if (a.topic) {
    const auto* node = snap.topic_graph().find(TopicId{*a.topic});
    if (!node) throw ValidationError("no topic " + std::to_string(*a.topic));
    json edges = json::array();
    for (const auto& e : snap.topic_graph().edges()) {
      if (e.from_id == node->id || e.to_id == node->id) edges.push_back(to_json(e));
    }
    json out = to_json(*node);
    out.erase("embedding");
    out["edges"] = edges;
    json nb = json::array();
    for (auto id : snap.neighbors(node->id)) nb.push_back(id.value);
    out["neighbors"] = nb;
    std::printf("%s\n", out.dump(2).c_str());
    return kOk;
  }
  if (a.archive) {
    const auto& g = snap.archive(ArchiveId{*a.archive});
    auto out = to_json(g);
    for (const auto& [t, arch] : snap.cross_index()) {
      if (arch == g.graph_id()) out["topic_id"] = t.value;
    }
    std::printf("%s\n", out.dump(2).c_str());
    return kOk;
  }
  std::size_t events = 0, sequential = 0;
  for (const auto& [id, g] : snap.archives()) {
    events += g->size();
    sequential += g->edges().size();
  }
  const auto topic_edges = snap.topic_graph().edges().size();
  json stats{{"event_nodes", events},
             {"live_events", snap.active_buffer().size()},
             {"topic_nodes", snap.topic_graph().size()},
             {"topic_edges", topic_edges},
             {"sequential_edges", sequential},
             {"cross_links", snap.cross_index().size()},
             {"edges", topic_edges + sequential + snap.cross_index().size()},
             {"archives", snap.archives().size()},
             {"logical_clock", snap.logical_clock()},
             {"hash", snap.hash()}};
  std::printf("%s\n", stats.dump(2).c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical graph memory engine", "hgmem"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ic = app.add_subcommand("ingest", "Replay a corpus and save the resulting snapshot");
  ic->add_option("--corpus", ingest.corpus, "Corpus directory with turns.jsonl (and qa.jsonl)")->required();
  ic->add_option("--strategy", ingest.strategy,
                 "semantic, session, fixed_window:N or fixed_turns:N")
      ->capture_default_str();
  ic->add_option("--snapshot-out", ingest.snapshot_out, "Snapshot file to write")->required();
  ic->add_option("--report", ingest.report, "Also write consolidation reports as JSON");
  add_common(ic, ingest.common);

  QueryArgs query;
  auto* qc = app.add_subcommand("query", "Retrieve ranked context from a snapshot");
  qc->add_option("--snapshot", query.snapshot, "Snapshot file")->required();
  qc->add_option("--text", query.text, "Query text")->required();
  qc->add_option("--k", query.k, "Number of results (default: retrieval_k of the snapshot)");
  qc->add_flag("--explain", query.explain, "Show p_sem, indicators and factor contributions");
  qc->add_flag("--json", query.as_json, "Print the ranked list as JSON");
  qc->add_option("--speaker", query.speakers, "Target speaker (repeatable)");
  qc->add_option("--time-sensitive", query.time_sensitive, "Override time sensitivity: true or false")
      ->check(CLI::IsMember({"true", "false"}));
  add_common(qc, query.common);

  EvalArgs eval;
  auto* ec = app.add_subcommand("eval", "Replay, evaluate and report");
  ec->add_option("--corpus", eval.corpus, "Corpus directory with turns.jsonl and qa.jsonl")->required();
  ec->add_option("--strategy", eval.strategies,
                 "Strategy or comma-separated list for a comparison matrix (repeatable)")
      ->capture_default_str();
  ec->add_option("--noise", eval.noise, "Segmentation noise levels eta in [0, 0.4] (repeatable)")
      ->check(CLI::Range(0.0, 0.4));
  ec->add_option("--checkpoints", eval.checkpoints, "Session counts for a scaling report, e.g. 3,15,27")
      ->delimiter(',');
  ec->add_option("--report", eval.report, "JSON report path; an aligned table goes next to it as .txt")->required();
  ec->add_option("--criteria", eval.criteria, "Criteria file; exit 1 if any line is violated");
  ec->add_option("--k", eval.k, "Evidence recall cutoff (default: retrieval_k)");
  add_common(ec, eval.common);
  ec->get_option("--noise")->delimiter(',');

  InspectArgs inspect;
  auto* xc = app.add_subcommand("inspect", "Print snapshot contents");
  xc->add_option("--snapshot", inspect.snapshot, "Snapshot file")->required();
  auto* topic = xc->add_option("--topic", inspect.topic, "Show one topic node with its edges");
  auto* archive = xc->add_option("--archive", inspect.archive, "Show one archived event graph");
  auto* stats = xc->add_flag("--stats", inspect.stats, "Aggregate counts (default)");
  topic->excludes(archive)->excludes(stats);
  archive->excludes(stats);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }

  try {
    if (*ic) return run_ingest(ingest);
    if (*qc) return run_query(query);
    if (*ec) return run_eval(eval);
    if (*xc) return run_inspect(inspect);
  } catch (const hgmem::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
