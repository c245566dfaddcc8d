#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "toklab/errors.hpp"
#include "toklab/rng.hpp"

namespace toklab {

// The 17 universal POS tags.
inline const std::array<std::string_view, 17>& upos_tags() {
  static const std::array<std::string_view, 17> tags = {
      "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
      "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};
  return tags;
}

inline bool is_upos(std::string_view tag) {
  for (std::string_view t : upos_tags()) {
    if (t == tag) return true;
  }
  return false;
}

struct Token {
  std::string form;
  std::string upos;
};

struct Sentence {
  std::vector<Token> tokens;
  std::string sent_id;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      cols.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return cols;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Reads CoNLL-U. Keeps FORM and UPOS of basic word lines; multiword range
// lines (id with '-') and empty nodes (id with '.') are skipped; all metadata
// except sent_id is discarded.
inline std::vector<Sentence> parse_conllu(std::istream& in) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (!current.tokens.empty()) sentences.push_back(std::move(current));
    current = Sentence{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      std::string_view rest = std::string_view(line).substr(1);
      const std::size_t eq = rest.find('=');
      if (eq != std::string_view::npos &&
          detail::trim(rest.substr(0, eq)) == "sent_id") {
        current.sent_id = std::string(detail::trim(rest.substr(eq + 1)));
      }
      continue;
    }
    const auto cols = detail::split_tabs(line);
    if (cols.size() < 4) {
      throw ParseError("token line has " + std::to_string(cols.size()) +
                           " columns, expected at least 4",
                       line_no);
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos) continue;  // multiword range
    if (id.find('.') != std::string_view::npos) continue;  // empty node
    if (!detail::all_digits(id)) {
      throw ParseError("malformed token id \"" + std::string(id) + "\"", line_no);
    }
    const std::string_view form = cols[1];
    const std::string_view upos = cols[3];
    if (form.empty()) throw ParseError("empty FORM", line_no);
    if (!is_upos(upos)) {
      throw ParseError("unknown UPOS tag \"" + std::string(upos) + "\"", line_no);
    }
    current.tokens.push_back(Token{std::string(form), std::string(upos)});
  }
  flush();
  return sentences;
}

inline std::vector<Sentence> load_conllu_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file: " + path);
  return parse_conllu(in);
}

// Below this many sentences a corpus gets the 6:2:2 split, at or above it
// the 8:1:1 split.
inline constexpr std::size_t kLowResourceThreshold = 1000;

// Split ratios are kept as integer weights so they sum to exactly one by
// construction and the floor arithmetic stays exact on every platform.
struct SplitSpec {
  std::int64_t train_weight = 8;
  std::int64_t dev_weight = 1;
  std::int64_t test_weight = 1;
  std::uint64_t seed = 0;

  std::int64_t total_weight() const {
    return train_weight + dev_weight + test_weight;
  }
  void validate() const {
    if (train_weight < 0 || dev_weight < 0 || test_weight < 0) {
      throw ContractError("SplitSpec: negative split weight");
    }
    if (total_weight() <= 0) {
      throw ContractError("SplitSpec: split weights sum to zero");
    }
  }
};

inline SplitSpec select_split_spec(std::size_t n_sentences,
                                   std::size_t low_resource_threshold = kLowResourceThreshold) {
  if (n_sentences == 0) throw ContractError("select_split_spec: empty corpus");
  SplitSpec spec;
  if (n_sentences < low_resource_threshold) {
    spec.train_weight = 6;
    spec.dev_weight = 2;
    spec.test_weight = 2;
  } else {
    spec.train_weight = 8;
    spec.dev_weight = 1;
    spec.test_weight = 1;
  }
  return spec;
}

struct CorpusSplit {
  std::vector<Sentence> train;
  std::vector<Sentence> dev;
  std::vector<Sentence> test;
};

// Seeded shuffle, then train gets floor(n*train_ratio), dev gets
// floor(n*dev_ratio), test gets the remainder.
inline CorpusSplit split_corpus(const std::vector<Sentence>& sentences,
                                const SplitSpec& spec) {
  spec.validate();
  if (sentences.empty()) throw ContractError("split_corpus: empty corpus");

  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  shuffle_deterministic(order, rng);

  const std::uint64_t n = sentences.size();
  const std::uint64_t w = static_cast<std::uint64_t>(spec.total_weight());
  const std::uint64_t n_train = n * static_cast<std::uint64_t>(spec.train_weight) / w;
  const std::uint64_t n_dev = n * static_cast<std::uint64_t>(spec.dev_weight) / w;

  CorpusSplit split;
  for (std::uint64_t i = 0; i < n; ++i) {
    const Sentence& s = sentences[order[i]];
    if (i < n_train) {
      split.train.push_back(s);
    } else if (i < n_train + n_dev) {
      split.dev.push_back(s);
    } else {
      split.test.push_back(s);
    }
  }
  return split;
}

}  // namespace toklab
