#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hgmem/ids.hpp"

namespace hgmem {

struct ScoredTopic {
  TopicId id;
  double similarity = 0.0;

  bool operator==(const ScoredTopic&) const = default;
};

/// Exact, exhaustive-scan cosine index over unit vectors stored row-major.
/// Rows are kept in insertion (id) order.
class VectorIndex {
 public:
  VectorIndex() = default;
  explicit VectorIndex(std::size_t dim) : dim_(dim) {}

  void add(TopicId id, std::span<const double> unit_vector);

  /// The k highest-similarity rows, similarity descending, ties by smaller
  /// id. Returns all rows when fewer than k exist.
  std::vector<ScoredTopic> topk(std::span<const double> unit_query, std::size_t k) const;

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<TopicId>& ids() const noexcept { return ids_; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  bool operator==(const VectorIndex&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<TopicId> ids_;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

}  // namespace hgmem
