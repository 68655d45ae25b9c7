#include "hgmem/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace hgmem::text {

std::size_t estimate_tokens(std::string_view s) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

std::vector<std::string> normalize_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'') {
      // contractions collapse: "don't" -> "dont"
      continue;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::set<std::string> token_set(std::string_view s) {
  auto toks = normalize_tokens(s);
  return {std::make_move_iterator(toks.begin()), std::make_move_iterator(toks.end())};
}

bool is_stopword(std::string_view token) {
  static const std::unordered_set<std::string_view> words{
      "a",       "about",   "above",  "actually", "after",   "again",  "all",     "also",
      "am",      "an",      "and",    "any",      "are",     "as",     "at",      "be",
      "because", "been",    "before", "being",    "both",    "but",    "by",      "can",
      "could",   "did",     "do",     "does",     "doing",   "done",   "dont",    "down",
      "during",  "each",    "even",   "ever",     "few",     "for",    "from",    "further",
      "get",     "got",     "had",    "has",      "have",    "having", "he",      "her",
      "here",    "hers",    "him",    "his",      "how",     "i",      "if",      "im",
      "in",      "into",    "is",     "it",       "its",     "ive",    "just",    "know",
      "like",    "lot",     "made",   "make",     "me",      "more",   "most",    "much",
      "my",      "myself",  "no",     "nor",      "not",     "now",    "of",      "off",
      "oh",      "ok",      "okay",   "on",       "once",    "one",    "only",    "or",
      "other",   "our",     "ours",   "out",      "over",    "own",    "pretty",  "quite",
      "really",  "right",   "said",   "same",     "say",     "she",    "should",  "so",
      "some",    "still",   "such",   "sure",     "tell",    "than",   "that",    "thats",
      "the",     "their",   "them",   "then",     "there",   "these",  "they",    "thing",
      "things",  "think",   "this",   "those",    "through", "to",     "too",     "under",
      "until",   "up",      "us",     "very",     "want",    "was",    "we",      "well",
      "were",    "what",    "when",   "where",    "which",   "while",  "who",     "whom",
      "why",     "will",    "with",   "would",    "wow",     "yeah",   "yes",     "you",
      "your",    "youre",   "yours",  "great",    "nice",    "good",   "cool",    "glad",
      "hear",    "sounds",  "sound",  "tell",     "let",     "lets",   "way",     "thanks",
      "thank",   "hope",    "maybe",  "kind",     "bit",     "feel",   "feels",   "always",
      "never",   "going",   "go",     "went",     "see",     "saw",    "new",     "lately"};
  return words.count(token) != 0;
}

std::set<std::string> content_words(std::string_view s) {
  std::set<std::string> out;
  for (auto& tok : normalize_tokens(s)) {
    if (!is_stopword(tok)) out.insert(std::move(tok));
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains_icase(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

}  // namespace hgmem::text
