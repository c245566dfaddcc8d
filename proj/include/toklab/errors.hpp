#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace toklab {

// Base class for all toklab exceptions.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid command-line usage or configuration.
struct UsageError : Error {
  using Error::Error;
};

// An operation was called outside its contract.
struct ContractError : Error {
  using Error::Error;
};

// Malformed input data; carries the 1-based line number.
struct ParseError : Error {
  ParseError(const std::string& message, std::size_t line_number)
      : Error(message + " (line " + std::to_string(line_number) + ")"),
        line(line_number) {}
  std::size_t line;
};

// Tokenizer training failure.
struct TrainError : Error {
  using Error::Error;
};

// Subword/gold alignment failure. Keeps both character streams so the
// mismatch can be reported verbatim.
struct AlignError : Error {
  AlignError(const std::string& message, std::size_t token_idx,
             bool boundary, std::string gold, std::string subwords)
      : Error(message + " at gold token " + std::to_string(token_idx) +
              " (gold: \"" + gold + "\", subwords: \"" + subwords + "\")"),
        token_index(token_idx),
        boundary_violation(boundary),
        gold_stream(std::move(gold)),
        subword_stream(std::move(subwords)) {}
  std::size_t token_index;
  bool boundary_violation;
  std::string gold_stream;
  std::string subword_stream;
};

// Model (de)serialization failure; the kind tells callers whether the file
// was written by an incompatible version, corrupted in transit, or holds
// values that violate model invariants.
struct ModelIoError : Error {
  enum class Kind { kVersion, kChecksum, kFormat, kInvariant };
  ModelIoError(Kind k, const std::string& message) : Error(message), kind(k) {}
  Kind kind;
};

// A statistic is undefined on the given input (e.g. zero rank variance).
struct StatError : Error {
  using Error::Error;
};

}  // namespace toklab
