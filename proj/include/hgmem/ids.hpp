#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace hgmem {

/// Engine-generated monotonic identifier. The tag keeps event, topic and
/// archive ids from being mixed up at compile time.
template <class Tag>
struct Id {
  std::uint64_t value = 0;

  constexpr auto operator<=>(const Id&) const = default;
};

struct EventTag {};
struct TopicTag {};
struct ArchiveTag {};

using EventId = Id<EventTag>;
using TopicId = Id<TopicTag>;
using ArchiveId = Id<ArchiveTag>;

template <class Tag>
std::string to_string(Id<Tag> id) {
  return std::to_string(id.value);
}

}  // namespace hgmem

template <class Tag>
struct std::hash<hgmem::Id<Tag>> {
  std::size_t operator()(hgmem::Id<Tag> id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
