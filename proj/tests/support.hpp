#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hgmem/errors.hpp"
#include "hgmem/mock_providers.hpp"
#include "hgmem/snapshot.hpp"

namespace testsupport {

inline std::filesystem::path source_dir() { return HGMEM_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return source_dir() / "fixtures" / name; }

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double n = 0.0;
  do {
    n = 0.0;
    for (auto& x : v) {
      x = g(rng);
      n += x * x;
    }
  } while (n == 0.0);
  n = std::sqrt(n);
  for (auto& x : v) x /= n;
  return v;
}

inline std::string random_text(std::mt19937_64& rng, std::size_t min_words = 1, std::size_t max_words = 12) {
  static const std::vector<std::string> kWords{
      "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet",
      "kilo", "lima", "mike", "november", "oscar", "papa", "quebec", "romeo", "sierra", "tango",
      "the", "and", "of", "we", "last", "Tuesday", "2023", "10:30", "cat", "dog"};
  const auto n = min_words + rng() % (max_words - min_words + 1);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += kWords[rng() % kWords.size()];
  }
  return s;
}

inline hgmem::Utterance utterance(std::string session, std::string speaker, std::string text,
                                  std::optional<std::string> ts = std::nullopt) {
  return hgmem::Utterance{std::move(session), std::move(speaker), std::move(text), std::move(ts), std::nullopt};
}

/// Snapshot with `topics` topic nodes built straight through the structural
/// API: each gets a 1-5 event archive, a random unit embedding and edges to
/// random earlier nodes.
inline hgmem::MemorySnapshot random_snapshot(std::mt19937_64& rng, std::size_t topics, double edge_prob,
                                             hgmem::EngineConfig config = {}) {
  using namespace hgmem;
  MemorySnapshot s(config);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  static const Relation kRelations[] = {Relation::support, Relation::contradict, Relation::coreference,
                                        Relation::causal, Relation::semantic};
  const auto dim = static_cast<std::size_t>(config.embedding_dim);
  for (std::size_t t = 0; t < topics; ++t) {
    const auto events = 1 + rng() % 5;
    for (std::size_t e = 0; e < events; ++e) {
      s.append_event(utterance("s" + std::to_string(t % 7), rng() % 2 ? "Ann" : "Ben", random_text(rng)));
    }
    s.begin_consolidation();
    const auto archive = s.archive_buffer();
    TopicNode node;
    node.id = s.next_topic_id();
    node.summary = random_text(rng, 2, 6);
    node.keywords = {"k" + std::to_string(t)};
    node.raw = render_raw(s.archive(archive).nodes());
    node.embedding = random_unit(rng, dim);
    node.created_at = s.logical_clock();
    node.source_archive_id = archive;
    std::vector<TopicEdge> edges;
    for (const auto& other : s.topic_graph().nodes()) {
      if (u01(rng) >= edge_prob) continue;
      const auto rel = kRelations[rng() % 5];
      const double w = config.tau + (1.0 - config.tau) * (0.01 + 0.99 * u01(rng));
      if (rng() % 2) {
        edges.push_back(TopicEdge{node.id, other.id, rel, w, is_directed(rel)});
      } else {
        edges.push_back(TopicEdge{other.id, node.id, rel, w, is_directed(rel)});
      }
    }
    s.insert_topic_node(std::move(node), std::move(edges));
    s.end_consolidation();
  }
  return s;
}

/// Wraps a provider bundle and fails the Nth provider call (1-based). In
/// persistent mode every later call fails too.
class FaultPlan {
 public:
  FaultPlan(std::size_t fail_at, bool persistent) : fail_at_(fail_at), persistent_(persistent) {}

  void tick() {
    const auto n = ++calls_;
    if (fail_at_ == 0) return;
    if (n == fail_at_ || (persistent_ && n > fail_at_)) throw hgmem::ProviderError("injected fault");
  }
  std::size_t calls() const { return calls_; }

 private:
  std::size_t fail_at_;
  bool persistent_;
  std::atomic<std::size_t> calls_{0};
};

inline hgmem::ProviderBundle faulty(const hgmem::ProviderBundle& inner, std::shared_ptr<FaultPlan> plan) {
  using namespace hgmem;
  struct E : Embedder {
    std::shared_ptr<Embedder> in;
    std::shared_ptr<FaultPlan> p;
    std::size_t dimension() const override { return in->dimension(); }
    std::vector<double> embed(std::string_view t) override {
      p->tick();
      return in->embed(t);
    }
  };
  struct D : BoundaryDiscriminator {
    std::shared_ptr<BoundaryDiscriminator> in;
    std::shared_ptr<FaultPlan> p;
    std::vector<std::int64_t> detect(std::span<const EventNode> b) override {
      p->tick();
      return in->detect(b);
    }
  };
  struct S : Summarizer {
    std::shared_ptr<Summarizer> in;
    std::shared_ptr<FaultPlan> p;
    Summary summarize(std::string_view c) override {
      p->tick();
      return in->summarize(c);
    }
    bool entails(std::string_view s, std::string_view u) override {
      p->tick();
      return in->entails(s, u);
    }
  };
  struct R : RelationScorer {
    std::shared_ptr<RelationScorer> in;
    std::shared_ptr<FaultPlan> p;
    RelationScore score(std::string_view a, std::string_view b) override {
      p->tick();
      return in->score(a, b);
    }
  };
  struct V : RelevanceScorer {
    std::shared_ptr<RelevanceScorer> in;
    std::shared_ptr<FaultPlan> p;
    double relevance(std::string_view q, std::string_view c) override {
      p->tick();
      return in->relevance(q, c);
    }
  };
  ProviderBundle out = inner;
  auto e = std::make_shared<E>();
  e->in = inner.embedder;
  e->p = plan;
  auto d = std::make_shared<D>();
  d->in = inner.discriminator;
  d->p = plan;
  auto s = std::make_shared<S>();
  s->in = inner.summarizer;
  s->p = plan;
  auto r = std::make_shared<R>();
  r->in = inner.relation_scorer;
  r->p = plan;
  auto v = std::make_shared<V>();
  v->in = inner.relevance_scorer;
  v->p = plan;
  out.embedder = e;
  out.discriminator = d;
  out.summarizer = s;
  out.relation_scorer = r;
  out.relevance_scorer = v;
  return out;
}

}  // namespace testsupport
