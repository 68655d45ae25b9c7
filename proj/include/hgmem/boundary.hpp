#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hgmem/providers.hpp"
#include "hgmem/snapshot.hpp"

namespace hgmem {

/// Sparse maintenance events that may invoke the discriminator. Closed set.
enum class TriggerKind { SessionEnd, InteractionPause, BufferOverflow, Manual };

std::string_view to_string(TriggerKind kind);

struct BoundaryTrigger {
  TriggerKind kind = TriggerKind::Manual;
  std::uint64_t observed_at = 0;
};

struct BoundaryVerdict {
  bool boundary_detected = false;
  /// Boundary i splits utterances i and i+1. For a forced overflow verdict
  /// this is {buffer_len - 1}: consolidate the whole buffer.
  std::vector<std::size_t> split_indices;
  bool forced = false;
  /// Discriminator output was unusable; the heuristic produced the verdict.
  bool degraded = false;

  bool operator==(const BoundaryVerdict&) const = default;
};

/// Embedding-divergence fallback. Compares the mean embedding of the first
/// and second half of the buffer; a boundary is declared iff their cosine
/// is below `cutoff`, placed at the adjacent-window gap of lowest cosine.
BoundaryVerdict heuristic_discriminator(std::span<const EventNode> buffer, Embedder& embedder,
                                        double cutoff, std::size_t window = 2);

/// Cosine between the mean embeddings of the two buffer halves. A buffer of
/// fewer than two utterances has similarity 1.
double half_split_similarity(std::span<const EventNode> buffer, Embedder& embedder);

/// Runs the discriminator for one trigger. Never mutates `snapshot`.
///
/// Transport failure propagates as ProviderError. Malformed output falls
/// back to the heuristic and marks the verdict degraded. Out-of-range or
/// unordered indices are dropped or sorted. An overflow trigger with no
/// boundary forces whole-buffer consolidation.
BoundaryVerdict check_boundary(const MemorySnapshot& snapshot, const BoundaryTrigger& trigger,
                               BoundaryDiscriminator& discriminator);

}  // namespace hgmem
