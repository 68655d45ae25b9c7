#include "hgmem/boundary.hpp"

#include <algorithm>
#include <limits>

#include "hgmem/errors.hpp"
#include "hgmem/mock_providers.hpp"

namespace hgmem {

std::string_view to_string(TriggerKind kind) {
  switch (kind) {
    case TriggerKind::SessionEnd: return "session_end";
    case TriggerKind::InteractionPause: return "interaction_pause";
    case TriggerKind::BufferOverflow: return "buffer_overflow";
    case TriggerKind::Manual: return "manual";
  }
  return "manual";
}

namespace {

std::vector<double> mean_embedding(std::span<const EventNode> nodes, Embedder& embedder) {
  std::vector<double> acc(embedder.dimension(), 0.0);
  for (const auto& n : nodes) {
    const auto v = embedder.embed(n.text);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  for (auto& x : acc) x /= static_cast<double>(nodes.size());
  return acc;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

}  // namespace

double half_split_similarity(std::span<const EventNode> buffer, Embedder& embedder) {
  if (buffer.size() < 2) return 1.0;
  const std::size_t mid = buffer.size() / 2;
  const auto first = mean_embedding(buffer.subspan(0, mid), embedder);
  const auto second = mean_embedding(buffer.subspan(mid), embedder);
  return cosine(first, second);
}

BoundaryVerdict heuristic_discriminator(std::span<const EventNode> buffer, Embedder& embedder,
                                        double cutoff, std::size_t window) {
  if (buffer.empty()) throw ValidationError("heuristic discriminator: empty buffer");
  BoundaryVerdict verdict;
  const double similarity = half_split_similarity(buffer, embedder);
  if (!(similarity < cutoff) || buffer.size() < 2) return verdict;

  double lowest = std::numeric_limits<double>::infinity();
  std::size_t split = 0;
  for (std::size_t i = 0; i + 1 < buffer.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    const std::size_t hi = std::min(buffer.size(), i + 1 + window);
    const auto left = mean_embedding(buffer.subspan(lo, i + 1 - lo), embedder);
    const auto right = mean_embedding(buffer.subspan(i + 1, hi - i - 1), embedder);
    const double c = cosine(left, right);
    if (c < lowest) {
      lowest = c;
      split = i;
    }
  }
  verdict.boundary_detected = true;
  verdict.split_indices = {split};
  return verdict;
}

BoundaryVerdict check_boundary(const MemorySnapshot& snapshot, const BoundaryTrigger& trigger,
                               BoundaryDiscriminator& discriminator) {
  const auto& nodes = snapshot.active_buffer().nodes();
  if (nodes.empty()) throw StateError("check_boundary on an empty buffer");

  BoundaryVerdict verdict;
  try {
    const auto raw = discriminator.detect(nodes);
    std::vector<std::size_t> indices;
    for (auto i : raw) {
      if (i >= 0 && static_cast<std::size_t>(i) + 1 < nodes.size()) {
        indices.push_back(static_cast<std::size_t>(i));
      }
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    verdict.split_indices = std::move(indices);
    verdict.boundary_detected = !verdict.split_indices.empty();
  } catch (const ParseError&) {
    mock::HashedEmbedder fallback(static_cast<std::size_t>(snapshot.config().embedding_dim), 0);
    verdict = heuristic_discriminator(nodes, fallback, snapshot.config().heuristic_cutoff);
    verdict.degraded = true;
  }

  if (trigger.kind == TriggerKind::BufferOverflow && !verdict.boundary_detected) {
    verdict.boundary_detected = true;
    verdict.forced = true;
    verdict.split_indices = {nodes.size() - 1};
  }
  return verdict;
}

}  // namespace hgmem
