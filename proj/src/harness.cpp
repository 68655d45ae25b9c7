#include "hgmem/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hgmem/errors.hpp"
#include "hgmem/text.hpp"

namespace hgmem::harness {

using nlohmann::json;

std::string turn_id(std::string_view session_id, std::uint64_t turn_index) {
  return std::string(session_id) + ":" + std::to_string(turn_index);
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::single_hop: return "single_hop";
    case Category::multi_hop: return "multi_hop";
    case Category::temporal: return "temporal";
    case Category::open_domain: return "open_domain";
  }
  return "single_hop";
}

std::optional<Category> category_from_string(std::string_view s) {
  for (auto c : {Category::single_hop, Category::multi_hop, Category::temporal, Category::open_domain}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::vector<std::string> DialogueCorpus::sessions() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& t : turns) {
    if (seen.insert(t.session_id).second) out.push_back(t.session_id);
  }
  return out;
}

void DialogueCorpus::validate() const {
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (!ids.insert(turn_id(turns[i].session_id, turns[i].turn_index)).second) {
      throw CorpusError("turns.jsonl", i + 1, "duplicate turn id " + turn_id(turns[i].session_id, turns[i].turn_index));
    }
  }
  for (std::size_t i = 0; i < qa.size(); ++i) {
    for (const auto& e : qa[i].evidence_turn_ids) {
      if (!ids.count(e)) throw CorpusError("qa.jsonl", i + 1, "evidence id " + e + " matches no turn");
    }
  }
}

namespace {

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const bool blank = line.find_first_not_of(" \t") == std::string_view::npos;
    if (!blank) fn(line, line_no);
    start = end + 1;
  }
}

json parse_row(std::string_view line, const std::string& origin, std::size_t row) {
  auto j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw CorpusError(origin, row, "not valid JSON");
  if (!j.is_object()) throw CorpusError(origin, row, "row is not a JSON object");
  return j;
}

std::string string_field(const json& j, const char* key, const std::string& origin, std::size_t row,
                         bool allow_empty = false) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw CorpusError(origin, row, std::string("missing string field '") + key + "'");
  auto s = it->get<std::string>();
  if (!allow_empty && s.empty()) throw CorpusError(origin, row, std::string("field '") + key + "' is empty");
  return s;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << bytes;
  if (!out) throw IoError("short write to " + p.string());
}

}  // namespace

std::vector<Turn> parse_turns(std::string_view jsonl, const std::string& origin) {
  std::vector<Turn> out;
  for_each_line(jsonl, [&](std::string_view line, std::size_t row) {
    const auto j = parse_row(line, origin, row);
    Turn t;
    t.session_id = string_field(j, "session_id", origin, row);
    auto idx = j.find("turn_index");
    if (idx == j.end() || !idx->is_number_unsigned()) {
      throw CorpusError(origin, row, "turn_index must be a non-negative integer");
    }
    t.turn_index = idx->get<std::uint64_t>();
    t.speaker = string_field(j, "speaker", origin, row);
    t.text = string_field(j, "text", origin, row);
    if (auto ts = j.find("timestamp"); ts != j.end() && !ts->is_null()) {
      if (!ts->is_string()) throw CorpusError(origin, row, "timestamp must be a string");
      t.timestamp = ts->get<std::string>();
    }
    out.push_back(std::move(t));
  });
  return out;
}

std::vector<QaItem> parse_qa(std::string_view jsonl, const std::string& origin) {
  std::vector<QaItem> out;
  for_each_line(jsonl, [&](std::string_view line, std::size_t row) {
    const auto j = parse_row(line, origin, row);
    QaItem q;
    q.question = string_field(j, "question", origin, row);
    q.gold_answer = string_field(j, "gold_answer", origin, row);
    const auto cat = string_field(j, "category", origin, row);
    auto c = category_from_string(cat);
    if (!c) throw CorpusError(origin, row, "unknown category '" + cat + "'");
    q.category = *c;
    if (auto ev = j.find("evidence_turn_ids"); ev != j.end() && !ev->is_null()) {
      if (!ev->is_array()) throw CorpusError(origin, row, "evidence_turn_ids must be an array");
      for (const auto& e : *ev) {
        if (!e.is_string()) throw CorpusError(origin, row, "evidence_turn_ids entries must be strings");
        q.evidence_turn_ids.push_back(e.get<std::string>());
      }
    }
    out.push_back(std::move(q));
  });
  return out;
}

std::string to_jsonl(const std::vector<Turn>& turns) {
  std::string out;
  for (const auto& t : turns) {
    json j{{"session_id", t.session_id}, {"turn_index", t.turn_index}, {"speaker", t.speaker}, {"text", t.text}};
    if (t.timestamp) j["timestamp"] = *t.timestamp;
    out += j.dump() + "\n";
  }
  return out;
}

std::string to_jsonl(const std::vector<QaItem>& qa) {
  std::string out;
  for (const auto& q : qa) {
    json j{{"question", q.question},
           {"gold_answer", q.gold_answer},
           {"category", std::string(to_string(q.category))},
           {"evidence_turn_ids", q.evidence_turn_ids}};
    out += j.dump() + "\n";
  }
  return out;
}

DialogueCorpus load_corpus(const std::filesystem::path& dir) {
  const auto turns_path = dir / "turns.jsonl";
  if (!std::filesystem::is_regular_file(turns_path)) throw IoError("corpus not found: " + turns_path.string());
  DialogueCorpus c;
  c.turns = parse_turns(read_file(turns_path), turns_path.string());
  const auto qa_path = dir / "qa.jsonl";
  if (std::filesystem::exists(qa_path)) c.qa = parse_qa(read_file(qa_path), qa_path.string());
  c.validate();
  return c;
}

void write_corpus(const DialogueCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "turns.jsonl", to_jsonl(corpus.turns));
  write_file(dir / "qa.jsonl", to_jsonl(corpus.qa));
}

std::string Strategy::name() const {
  switch (kind) {
    case Kind::semantic: return "semantic";
    case Kind::session: return "session";
    case Kind::fixed_window: return "fixed_window:" + std::to_string(size);
    case Kind::fixed_turns: return "fixed_turns:" + std::to_string(size);
    case Kind::cut_points: return "cut_points";
  }
  return "semantic";
}

Strategy Strategy::parse(std::string_view spec) {
  Strategy s;
  if (spec == "semantic") return s;
  if (spec == "session") {
    s.kind = Kind::session;
    return s;
  }
  const auto colon = spec.find(':');
  const auto head = spec.substr(0, colon);
  if (colon != std::string_view::npos && (head == "fixed_window" || head == "fixed_turns")) {
    const std::string arg(spec.substr(colon + 1));
    std::size_t used = 0;
    unsigned long n = 0;
    try {
      n = std::stoul(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != arg.size() || n == 0 || arg.front() == '-') {
      throw ValidationError("strategy size must be a positive integer: " + std::string(spec));
    }
    s.kind = head == "fixed_window" ? Kind::fixed_window : Kind::fixed_turns;
    s.size = n;
    return s;
  }
  throw ValidationError("unknown strategy '" + std::string(spec) +
                        "' (semantic, session, fixed_window:N, fixed_turns:N)");
}

Strategy Strategy::at_cut_points(std::set<std::size_t> cuts) {
  Strategy s;
  s.kind = Kind::cut_points;
  s.cuts = std::move(cuts);
  return s;
}

Replayer::Replayer(Engine& engine, Strategy strategy) : engine_(engine), strategy_(std::move(strategy)) {
  buffer_start_ = 0;
}

void Replayer::account(const std::vector<ConsolidationReport>& reports) {
  for (const auto& r : reports) {
    buffer_start_ += r.segment_length;
    stats_.cut_positions.push_back(buffer_start_ - 1);
    ++stats_.consolidations;
  }
}

void Replayer::consolidate_all(bool forced) {
  const auto size = engine_.snapshot()->active_buffer().size();
  if (size == 0) return;
  if (auto report = engine_.consolidate_prefix(size, forced)) {
    account({*report});
  } else {
    ++stats_.aborted;
  }
}

void Replayer::feed(const Turn& turn, bool session_end) {
  const Utterance u{turn.session_id, turn.speaker, turn.text, turn.timestamp, turn.turn_index};
  const auto aborted_before = engine_.telemetry().aborted;
  if (strategy_.kind == Strategy::Kind::semantic) {
    account(engine_.ingest(u, session_end).reports);
    stats_.aborted += engine_.telemetry().aborted - aborted_before;
  } else {
    engine_.append(u);
    const auto snap = engine_.snapshot();
    const auto& buf = snap->active_buffer();
    const auto limit = static_cast<std::uint64_t>(engine_.config().buffer_token_limit);
    bool cut = false;
    switch (strategy_.kind) {
      case Strategy::Kind::session: cut = session_end; break;
      case Strategy::Kind::fixed_window: cut = buf.token_total() >= strategy_.size; break;
      case Strategy::Kind::fixed_turns: cut = buf.size() >= strategy_.size; break;
      case Strategy::Kind::cut_points: cut = strategy_.cuts.count(position_) != 0; break;
      case Strategy::Kind::semantic: break;
    }
    if (cut) {
      consolidate_all(false);
    } else if (buf.token_total() > limit) {
      consolidate_all(true);
    }
  }
  ++position_;
  ++stats_.turns;
  if (session_end) ++stats_.sessions;
}

ReplayStats replay(const DialogueCorpus& corpus, Engine& engine, const Strategy& strategy,
                   std::size_t max_sessions) {
  Replayer r(engine, strategy);
  std::size_t sessions = 0;
  for (std::size_t i = 0; i < corpus.turns.size(); ++i) {
    const bool end = i + 1 == corpus.turns.size() || corpus.turns[i + 1].session_id != corpus.turns[i].session_id;
    r.feed(corpus.turns[i], end);
    if (end && ++sessions == max_sessions) break;
  }
  return r.stats();
}

void NoiseSpec::validate() const {
  const double hi = deletion_forced ? 1.0 : 0.4;
  if (!(eta >= 0.0 && eta <= hi)) {
    throw ValidationError("noise eta must lie in [0, " + std::string(deletion_forced ? "1" : "0.4") + "]");
  }
}

std::vector<std::size_t> inject_noise(const std::vector<std::size_t>& boundaries, const NoiseSpec& spec,
                                      std::size_t num_turns) {
  spec.validate();
  if (num_turns == 0) return {};
  std::vector<std::size_t> sorted(boundaries);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::mt19937_64 rng(spec.seed);
  auto uniform01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  static constexpr int kShifts[] = {-2, -1, 1, 2};
  const auto last = static_cast<std::int64_t>(num_turns - 1);

  std::set<std::size_t> out;
  for (auto b : sorted) {
    if (!(uniform01() < spec.eta)) {
      out.insert(b);
      continue;
    }
    if (spec.deletion_forced) continue;
    if ((rng() & 1) == 0) continue;
    const auto shifted = static_cast<std::int64_t>(b) + kShifts[rng() % 4];
    out.insert(static_cast<std::size_t>(std::clamp<std::int64_t>(shifted, 0, last)));
  }
  const auto extras = static_cast<std::size_t>(std::llround(spec.eta * static_cast<double>(sorted.size())));
  for (std::size_t i = 0; i < extras && out.size() < num_turns; ++i) {
    std::size_t p = 0;
    do {
      p = static_cast<std::size_t>(rng() % num_turns);
    } while (out.count(p));
    out.insert(p);
  }
  return {out.begin(), out.end()};
}

namespace {

std::size_t common_count(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& g : gold) ++counts[g];
  std::size_t common = 0;
  for (const auto& p : pred) {
    auto it = counts.find(p);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return common;
}

}  // namespace

double token_f1(std::string_view prediction, std::string_view gold) {
  const auto p = text::normalize_tokens(prediction);
  const auto g = text::normalize_tokens(gold);
  if (p.empty() || g.empty()) return p.empty() && g.empty() ? 1.0 : 0.0;
  const auto common = common_count(p, g);
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

double bleu1(std::string_view prediction, std::string_view gold) {
  const auto p = text::normalize_tokens(prediction);
  const auto g = text::normalize_tokens(gold);
  if (p.empty()) return g.empty() ? 1.0 : 0.0;
  const double precision = static_cast<double>(common_count(p, g)) / static_cast<double>(p.size());
  const double c = static_cast<double>(p.size());
  const double r = static_cast<double>(g.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return precision * bp;
}

EvalMetrics evaluate(const DialogueCorpus& corpus, const Engine& engine, std::size_t k,
                     const std::vector<std::size_t>& item_indices) {
  EvalMetrics m;
  m.k = k ? k : static_cast<std::size_t>(engine.config().retrieval_k);
  const auto& providers = engine.providers();
  const auto log_start = providers.call_log ? providers.call_log->size() : 0;

  std::vector<std::size_t> indices = item_indices;
  if (indices.empty()) {
    indices.resize(corpus.qa.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  }

  std::map<std::string, std::pair<double, std::size_t>> recall_sums;
  double f1_sum = 0.0, bleu_sum = 0.0;
  std::size_t answered = 0;

  for (auto idx : indices) {
    const auto& item = corpus.qa.at(idx);
    ItemResult r;
    r.index = idx;
    r.category = item.category;
    ++m.items;
    try {
      Query q;
      q.text = item.question;
      const auto res = engine.query(q, m.k);
      if (!item.evidence_turn_ids.empty()) {
        std::set<std::string> hits;
        for (const auto& c : res.ranked) hits.insert(turn_id(c.session_id, c.turn_index));
        std::size_t found = 0;
        for (const auto& e : item.evidence_turn_ids) found += hits.count(e);
        r.recall = static_cast<double>(found) / static_cast<double>(item.evidence_turn_ids.size());
      }
      if (providers.answerer) {
        std::vector<std::string> context;
        for (const auto& c : res.ranked) context.push_back(c.speaker + ": " + c.text);
        const auto answer = providers.answerer->answer(item.question, context);
        r.f1 = token_f1(answer, item.gold_answer);
        r.bleu1 = bleu1(answer, item.gold_answer);
      }
    } catch (const Error& e) {
      r.error = e.what();
      r.recall.reset();
      r.f1.reset();
      r.bleu1.reset();
      ++m.failures;
    }
    if (r.recall) {
      auto& cat = recall_sums[std::string(to_string(item.category))];
      cat.first += *r.recall;
      ++cat.second;
      auto& all = recall_sums["overall"];
      all.first += *r.recall;
      ++all.second;
    }
    if (r.f1) {
      f1_sum += *r.f1;
      bleu_sum += *r.bleu1;
      ++answered;
    }
    m.details.push_back(std::move(r));
  }

  for (const auto& [cat, sum] : recall_sums) m.recall_at_k[cat] = sum.first / static_cast<double>(sum.second);
  if (answered) {
    m.f1 = f1_sum / static_cast<double>(answered);
    m.bleu1 = bleu_sum / static_cast<double>(answered);
  }
  if (providers.call_log) {
    const auto entries = providers.call_log->entries_since(log_start);
    m.usage = record_usage(entries, m.items - m.failures);
  }
  return m;
}

std::vector<ScalingRow> scaling_report(const DialogueCorpus& corpus, Engine& engine, const Strategy& strategy,
                                       const std::vector<std::size_t>& checkpoints) {
  std::vector<std::size_t> marks(checkpoints);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  std::unordered_map<std::string, std::size_t> position_of;
  for (std::size_t i = 0; i < corpus.turns.size(); ++i) {
    position_of[turn_id(corpus.turns[i].session_id, corpus.turns[i].turn_index)] = i;
  }

  std::vector<ScalingRow> rows;
  Replayer replayer(engine, strategy);
  std::size_t sessions = 0;
  std::size_t next_mark = 0;
  for (std::size_t i = 0; i < corpus.turns.size() && next_mark < marks.size(); ++i) {
    const bool end = i + 1 == corpus.turns.size() || corpus.turns[i + 1].session_id != corpus.turns[i].session_id;
    replayer.feed(corpus.turns[i], end);
    if (!end) continue;
    ++sessions;
    if (sessions != marks[next_mark]) continue;
    ++next_mark;

    ScalingRow row;
    row.sessions = sessions;
    row.turns_consumed = i + 1;
    const auto snap = engine.snapshot();
    for (const auto& [id, g] : snap->archives()) {
      row.event_nodes += g->size();
      row.sequential_edges += g->edges().size();
    }
    row.live_events = snap->active_buffer().size();
    row.topic_nodes = snap->topic_graph().size();
    row.topic_edges = snap->topic_graph().edges().size();
    row.cross_links = snap->cross_index().size();
    row.edges = row.topic_edges + row.sequential_edges + row.cross_links;

    std::vector<std::size_t> items;
    for (std::size_t q = 0; q < corpus.qa.size(); ++q) {
      bool seen = true;
      for (const auto& e : corpus.qa[q].evidence_turn_ids) {
        auto it = position_of.find(e);
        if (it == position_of.end() || it->second > i) seen = false;
      }
      if (seen) items.push_back(q);
    }
    row.qa_items = items.size();
    if (!items.empty()) {
      const auto m = evaluate(corpus, engine, 0, items);
      row.tokens_per_query = m.usage.tokens_per_query;
      row.latency_seconds = m.usage.mean_latency_seconds;
      row.f1 = m.f1;
      if (auto it = m.recall_at_k.find("overall"); it != m.recall_at_k.end()) row.recall_at_k = it->second;
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json metrics_row(const std::string& name, const EvalMetrics& m, const ReplayStats& stats,
                 const MemorySnapshot& snapshot) {
  json row{{"name", name},
           {"consolidations", stats.consolidations},
           {"aborted", stats.aborted},
           {"topic_nodes", snapshot.topic_graph().size()},
           {"topic_edges", snapshot.topic_graph().edges().size()},
           {"live_events", snapshot.active_buffer().size()},
           {"items", m.items},
           {"failures", m.failures},
           {"f1", optional_number(m.f1)},
           {"bleu1", optional_number(m.bleu1)},
           {"tokens_per_query", m.usage.tokens_per_query},
           {"latency_s", m.usage.mean_latency_seconds}};
  auto recall = [&](const std::string& key) -> json {
    auto it = m.recall_at_k.find(key);
    return it == m.recall_at_k.end() ? json(nullptr) : json(it->second);
  };
  row["recall_at_k"] = recall("overall");
  for (auto c : {Category::single_hop, Category::multi_hop, Category::temporal, Category::open_domain}) {
    row["recall_" + std::string(to_string(c))] = recall(std::string(to_string(c)));
  }
  return row;
}

json scaling_rows(const std::vector<ScalingRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"name", std::to_string(r.sessions)},
                   {"sessions", r.sessions},
                   {"turns", r.turns_consumed},
                   {"event_nodes", r.event_nodes},
                   {"live_events", r.live_events},
                   {"topic_nodes", r.topic_nodes},
                   {"topic_edges", r.topic_edges},
                   {"sequential_edges", r.sequential_edges},
                   {"cross_links", r.cross_links},
                   {"edges", r.edges},
                   {"qa_items", r.qa_items},
                   {"tokens_per_query", r.tokens_per_query},
                   {"latency_s", r.latency_seconds},
                   {"f1", optional_number(r.f1)},
                   {"recall_at_k", r.recall_at_k}});
  }
  return out;
}

std::string format_table(const json& report) {
  std::vector<std::string> columns;
  for (const auto& c : report.at("columns")) columns.push_back(c.get<std::string>());
  std::vector<std::vector<std::string>> cells;
  cells.push_back(columns);
  for (const auto& row : report.at("rows")) {
    std::vector<std::string> line;
    for (const auto& c : columns) {
      auto it = row.find(c);
      if (it == row.end() || it->is_null()) {
        line.emplace_back("-");
      } else if (it->is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4f", it->get<double>());
        line.emplace_back(buf);
      } else if (it->is_string()) {
        line.push_back(it->get<std::string>());
      } else {
        line.push_back(it->dump());
      }
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(columns.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      const auto& cell = cells[r][i];
      const bool left = i == 0;
      const auto pad = std::string(width[i] - cell.size(), ' ');
      if (i) out += "  ";
      out += left ? cell + pad : pad + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    }
  }
  return out;
}

namespace {

bool split_ref(std::string_view ref, std::string& row, std::string& metric) {
  const auto dot = ref.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == ref.size()) return false;
  row = std::string(ref.substr(0, dot));
  metric = std::string(ref.substr(dot + 1));
  return true;
}

std::optional<double> lookup(const json& report, const std::string& row, const std::string& metric) {
  for (const auto& r : report.at("rows")) {
    if (r.value("name", "") != row) continue;
    auto it = r.find(metric);
    if (it == r.end() || !it->is_number()) return std::nullopt;
    return it->get<double>();
  }
  return std::nullopt;
}

bool compare(double a, const std::string& op, double b) {
  if (op == "<") return a < b;
  if (op == "<=") return a <= b;
  if (op == ">") return a > b;
  if (op == ">=") return a >= b;
  if (op == "==") return a == b;
  return a != b;
}

}  // namespace

std::vector<Criterion> parse_criteria(std::string_view text) {
  static const std::set<std::string> kOps{"<", "<=", ">", ">=", "==", "!="};
  std::vector<Criterion> out;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '#') return;
    std::istringstream in{std::string(line)};
    std::string lhs, op, rhs, extra;
    in >> lhs >> op >> rhs;
    Criterion c;
    c.line = line_no;
    c.text = std::string(line.substr(first));
    if (rhs.empty() || (in >> extra) || !kOps.count(op) || !split_ref(lhs, c.row, c.metric)) {
      throw ValidationError("criteria line " + std::to_string(line_no) + ": expected '<row>.<metric> <op> <value>'");
    }
    c.op = op;
    char* end = nullptr;
    const double v = std::strtod(rhs.c_str(), &end);
    if (end && *end == '\0') {
      c.value = v;
    } else if (!split_ref(rhs, c.rhs_row, c.rhs_metric)) {
      throw ValidationError("criteria line " + std::to_string(line_no) + ": bad right-hand side '" + rhs + "'");
    }
    out.push_back(std::move(c));
  });
  return out;
}

std::vector<std::string> check_criteria(const json& report, const std::vector<Criterion>& criteria) {
  std::vector<std::string> violations;
  for (const auto& c : criteria) {
    const auto lhs = lookup(report, c.row, c.metric);
    std::optional<double> rhs = c.value;
    if (!rhs) rhs = lookup(report, c.rhs_row, c.rhs_metric);
    if (!lhs || !rhs) {
      violations.push_back("line " + std::to_string(c.line) + ": " + c.text + " (metric not in report)");
    } else if (!compare(*lhs, c.op, *rhs)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, " (%.6g vs %.6g)", *lhs, *rhs);
      violations.push_back("line " + std::to_string(c.line) + ": " + c.text + buf);
    }
  }
  return violations;
}

}  // namespace hgmem::harness
