#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgmem/harness.hpp"

namespace hgmem::synthetic {

/// A conversation theme: an anchor word present in every utterance of a
/// segment plus a pool of theme words. Vocabularies are pairwise disjoint.
struct Theme {
  std::string name;
  std::string anchor;
  std::vector<std::string> words;
};

const std::vector<Theme>& themes();

/// Utterance templates built from stopwords only; {a} is the anchor and
/// {b} a theme word.
const std::vector<std::string>& templates();

struct Fixture {
  harness::DialogueCorpus corpus;
  /// Corpus positions of the last turn before each planted topic shift.
  std::vector<std::size_t> shifts;
};

/// One session, pet adoption then a job interview.
Fixture smoke();
/// Three sessions of four topics each, ten QA items.
Fixture golden();
/// 27 sessions of three topics each, one QA item per session.
Fixture scaling(std::uint64_t seed = 27);

}  // namespace hgmem::synthetic
