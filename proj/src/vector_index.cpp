#include "hgmem/vector_index.hpp"

#include <algorithm>
#include <cmath>

#include "hgmem/errors.hpp"

namespace hgmem {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void VectorIndex::add(TopicId id, std::span<const double> unit_vector) {
  if (unit_vector.size() != dim_) {
    throw ValidationError("vector index: dimension " + std::to_string(unit_vector.size()) +
                          " != " + std::to_string(dim_));
  }
  ids_.push_back(id);
  data_.insert(data_.end(), unit_vector.begin(), unit_vector.end());
}

std::vector<ScoredTopic> VectorIndex::topk(std::span<const double> unit_query, std::size_t k) const {
  if (unit_query.size() != dim_) {
    throw ValidationError("vector index: query dimension " + std::to_string(unit_query.size()) +
                          " != " + std::to_string(dim_));
  }
  std::vector<ScoredTopic> scored;
  scored.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    scored.push_back({ids_[i], dot(row(i), unit_query)});
  }
  auto better = [](const ScoredTopic& a, const ScoredTopic& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
  };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    better);
  scored.resize(n);
  return scored;
}

}  // namespace hgmem
