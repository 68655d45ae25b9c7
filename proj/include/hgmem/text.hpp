#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hgmem::text {

/// Whitespace-delimited token count; the engine's token estimator.
std::size_t estimate_tokens(std::string_view s);

/// Lowercased alphanumeric tokens with punctuation stripped, in order.
std::vector<std::string> normalize_tokens(std::string_view s);

std::set<std::string> token_set(std::string_view s);

/// Tokens of `s` minus stopwords and conversational filler.
std::set<std::string> content_words(std::string_view s);

bool is_stopword(std::string_view token);

/// |a ∩ b| / |a ∪ b|; 0 when both are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

std::string to_lower(std::string_view s);

/// Case-insensitive substring test.
bool contains_icase(std::string_view haystack, std::string_view needle);

}  // namespace hgmem::text
