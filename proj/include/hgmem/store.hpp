#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hgmem/snapshot.hpp"
#include "hgmem/vector_index.hpp"

namespace hgmem::store {

/// "<major>.<minor>"; files with another major version are rejected.
inline constexpr const char* kFormatVersion = "1.0";

/// Canonical file document: the snapshot plus `format_version` and
/// `snapshot_hash` (SHA-256 over the snapshot's canonical bytes).
std::string encode(const MemorySnapshot& snapshot);

/// Parses and validates every snapshot invariant, then the hash. Any
/// failure is a CorruptionError naming the invariant.
MemorySnapshot decode(std::string_view bytes);

/// Writes via a temporary file and rename. Throws IoError.
void save(const MemorySnapshot& snapshot, const std::filesystem::path& path);

MemorySnapshot load(const std::filesystem::path& path);

/// Exact top-k by cosine, ties by smaller id. Shared with candidate
/// selection.
std::vector<ScoredTopic> vector_topk(const VectorIndex& index, std::span<const double> query, std::size_t k);

/// Fresh index over the current topic embeddings.
VectorIndex rebuild_index(const TopicGraph& topics, std::size_t dim);

}  // namespace hgmem::store
