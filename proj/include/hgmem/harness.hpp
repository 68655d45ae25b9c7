#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hgmem/engine.hpp"

namespace hgmem::harness {

struct Turn {
  std::string session_id;
  std::uint64_t turn_index = 0;
  std::string speaker;
  std::string text;
  std::optional<std::string> timestamp;

  bool operator==(const Turn&) const = default;
};

/// "<session_id>:<turn_index>", the id QA evidence refers to.
std::string turn_id(std::string_view session_id, std::uint64_t turn_index);

enum class Category { single_hop, multi_hop, temporal, open_domain };

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);

struct QaItem {
  std::string question;
  std::string gold_answer;
  Category category = Category::single_hop;
  std::vector<std::string> evidence_turn_ids;

  bool operator==(const QaItem&) const = default;
};

struct DialogueCorpus {
  std::vector<Turn> turns;
  std::vector<QaItem> qa;

  /// Distinct sessions in order of first appearance.
  std::vector<std::string> sessions() const;

  /// Turn ids unique, evidence ids resolve. Throws CorpusError.
  void validate() const;
};

/// JSON-lines parsing; errors carry 1-based line numbers.
std::vector<Turn> parse_turns(std::string_view jsonl, const std::string& origin = "turns.jsonl");
std::vector<QaItem> parse_qa(std::string_view jsonl, const std::string& origin = "qa.jsonl");

std::string to_jsonl(const std::vector<Turn>& turns);
std::string to_jsonl(const std::vector<QaItem>& qa);

/// Reads `turns.jsonl` and, when present, `qa.jsonl` from `dir`.
DialogueCorpus load_corpus(const std::filesystem::path& dir);
void write_corpus(const DialogueCorpus& corpus, const std::filesystem::path& dir);

/// Where consolidation cuts fall.
///   semantic          discriminator on sparse triggers
///   session           one consolidation per session
///   fixed_window:N    once the buffer holds at least N tokens
///   fixed_turns:N     every N turns
///   cut_points        after each listed corpus position (0-based)
/// All but semantic bypass the discriminator and also force a whole-buffer
/// consolidation on overflow.
struct Strategy {
  enum class Kind { semantic, session, fixed_window, fixed_turns, cut_points };
  Kind kind = Kind::semantic;
  std::size_t size = 0;
  std::set<std::size_t> cuts;

  std::string name() const;
  static Strategy parse(std::string_view spec);
  static Strategy at_cut_points(std::set<std::size_t> cuts);
};

struct ReplayStats {
  std::size_t turns = 0;
  std::size_t sessions = 0;
  std::size_t consolidations = 0;
  std::size_t aborted = 0;
  /// Corpus position of the last turn of every consolidated segment.
  std::vector<std::size_t> cut_positions;
};

/// Feeds turns one at a time so a replay can pause at checkpoints.
class Replayer {
 public:
  Replayer(Engine& engine, Strategy strategy);

  void feed(const Turn& turn, bool session_end);
  const ReplayStats& stats() const noexcept { return stats_; }

 private:
  void consolidate_all(bool forced);
  void account(const std::vector<ConsolidationReport>& reports);

  Engine& engine_;
  Strategy strategy_;
  ReplayStats stats_;
  std::size_t position_ = 0;
  std::size_t buffer_start_ = 0;
};

/// Replays the first `max_sessions` sessions (all when 0).
ReplayStats replay(const DialogueCorpus& corpus, Engine& engine, const Strategy& strategy,
                   std::size_t max_sessions = 0);

struct NoiseSpec {
  double eta = 0.0;
  std::uint64_t seed = 0;
  /// Limiting case: every perturbed boundary is deleted, and eta may be 1.
  bool deletion_forced = false;

  void validate() const;
};

/// Perturbs cut positions over a corpus of `num_turns` turns.
///
/// One std::mt19937_64 seeded with spec.seed drives every decision, each
/// consuming one raw draw, boundaries visited in ascending order:
///   perturb   u = (draw >> 11) * 2^-53 < eta
///   action    draw & 1: 0 delete, 1 shift (skipped when deletion_forced)
///   shift     {-2, -1, +1, +2}[draw % 4], clamped to [0, num_turns - 1]
/// then round(eta * count) extra positions draw % num_turns, redrawn while
/// already present. Result sorted and unique.
std::vector<std::size_t> inject_noise(const std::vector<std::size_t>& boundaries, const NoiseSpec& spec,
                                      std::size_t num_turns);

/// Token-multiset F1 over normalised tokens.
double token_f1(std::string_view prediction, std::string_view gold);

/// Clipped unigram precision times the brevity penalty exp(1 - r/c) when
/// the prediction is shorter than the reference.
double bleu1(std::string_view prediction, std::string_view gold);

struct ItemResult {
  std::size_t index = 0;
  Category category = Category::single_hop;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> bleu1;
  std::optional<std::string> error;
};

struct EvalMetrics {
  std::size_t k = 0;
  std::size_t items = 0;
  std::size_t failures = 0;
  std::optional<double> f1;
  std::optional<double> bleu1;
  /// Mean evidence recall@k per category and under "overall".
  std::map<std::string, double> recall_at_k;
  UsageSummary usage;
  std::vector<ItemResult> details;
};

/// Runs retrieval (and answer synthesis when an answerer is configured)
/// for every QA item. Read-only on the engine's snapshot.
/// An empty `item_indices` evaluates every item.
EvalMetrics evaluate(const DialogueCorpus& corpus, const Engine& engine, std::size_t k = 0,
                     const std::vector<std::size_t>& item_indices = {});

struct ScalingRow {
  std::size_t sessions = 0;
  std::size_t turns_consumed = 0;
  std::size_t event_nodes = 0;  // archived
  std::size_t live_events = 0;
  std::size_t topic_nodes = 0;
  std::size_t topic_edges = 0;
  std::size_t sequential_edges = 0;  // within archives
  std::size_t cross_links = 0;
  std::size_t edges = 0;  // sum of the three above
  std::size_t qa_items = 0;
  double tokens_per_query = 0.0;
  double latency_seconds = 0.0;
  std::optional<double> f1;
  double recall_at_k = 0.0;
};

/// Replays session by session and measures at each checkpoint, using the
/// QA items whose evidence has been consumed so far.
std::vector<ScalingRow> scaling_report(const DialogueCorpus& corpus, Engine& engine, const Strategy& strategy,
                                       const std::vector<std::size_t>& checkpoints);

// Reports: {"kind", "columns", "rows": [{"name", <metric>: number...}], ...}

nlohmann::json metrics_row(const std::string& name, const EvalMetrics& m, const ReplayStats& stats,
                           const MemorySnapshot& snapshot);
nlohmann::json scaling_rows(const std::vector<ScalingRow>& rows);

/// Aligned plain-text table of `report["rows"]` over `report["columns"]`.
std::string format_table(const nlohmann::json& report);

/// `<row>.<metric> <op> <number | row.metric>`, op in < <= > >= == !=.
struct Criterion {
  std::string row;
  std::string metric;
  std::string op;
  std::optional<double> value;
  std::string rhs_row;
  std::string rhs_metric;
  std::size_t line = 0;
  std::string text;
};

std::vector<Criterion> parse_criteria(std::string_view text);

/// Violated criteria, described. A missing row or metric is a violation.
std::vector<std::string> check_criteria(const nlohmann::json& report, const std::vector<Criterion>& criteria);

}  // namespace hgmem::harness
