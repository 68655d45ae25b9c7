#pragma once

#include <span>
#include <string>
#include <string_view>

#include "hgmem/event_graph.hpp"

namespace hgmem::prompts {

/// Edge typing between a new memory (1) and an existing one (2).
std::string relation(std::string_view memory_1, std::string_view memory_2);

/// Keywords plus a one to two sentence summary of `content`.
std::string summary(std::string_view content);

/// Topic boundaries over a linearised buffer.
std::string boundary(std::span<const EventNode> buffer);

/// Self-consistency check used to stamp confidence flags.
std::string entailment(std::string_view summary, std::string_view utterance);

std::string temporal(std::string_view query);

std::string answer(std::string_view question, std::span<const std::string> context);

/// Appended to the original prompt after an unparseable reply.
std::string repair(std::string_view original, std::string_view bad_reply, std::string_view expected);

}  // namespace hgmem::prompts
