#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hgmem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State-machine contract violated (re-entrant append, archiving an empty
/// buffer, consolidating outside the writer path).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Rejected input to a structural mutation or query.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Model provider could not be reached or returned a transport-level failure.
class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& what, bool retriable = true)
      : Error(what), retriable_(retriable) {}

  bool retriable() const noexcept { return retriable_; }

 private:
  bool retriable_;
};

/// Provider answered, but the payload did not match the expected schema
/// even after the repair re-prompt.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A consolidation transaction was rolled back; the snapshot is unchanged.
class ConsolidationAborted : public Error {
 public:
  using Error::Error;
};

/// A persisted snapshot failed an invariant check while loading.
class CorruptionError : public Error {
 public:
  CorruptionError(std::string invariant, const std::string& detail)
      : Error("snapshot corrupt [" + invariant + "]: " + detail),
        invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed dialogue corpus row. `row` is 1-based within its file.
class CorpusError : public Error {
 public:
  CorpusError(std::string file, std::size_t row, const std::string& detail)
      : Error(file + ":" + std::to_string(row) + ": " + detail), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace hgmem
