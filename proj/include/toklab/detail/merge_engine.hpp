#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toklab/errors.hpp"
#include "toklab/text.hpp"
#include "toklab/vocab.hpp"

namespace toklab::detail {

using SymbolPair = std::pair<std::string, std::string>;

// A word as the merge trainers see it: its code points plus the boundary
// marker symbol (the end-of-word marker is atomic, not four characters).
inline std::vector<std::string> word_symbols(std::string_view word, MarkerStyle style) {
  std::vector<std::string> syms;
  if (style == MarkerStyle::kWordInitialUnderscore) {
    syms.emplace_back(kWordInitialMarker);
  }
  for (std::string& cp : codepoints(word)) syms.push_back(std::move(cp));
  if (style == MarkerStyle::kEndOfWordSuffix) {
    syms.emplace_back(kEndOfWordMarker);
  }
  return syms;
}

// Merges every adjacent (left, right) occurrence, scanning left to right.
inline std::vector<std::string> apply_merge_to_symbols(
    const std::vector<std::string>& syms, const SymbolPair& pair) {
  std::vector<std::string> out;
  out.reserve(syms.size());
  std::size_t i = 0;
  while (i < syms.size()) {
    if (i + 1 < syms.size() && syms[i] == pair.first && syms[i + 1] == pair.second) {
      out.push_back(pair.first + pair.second);
      i += 2;
    } else {
      out.push_back(syms[i]);
      ++i;
    }
  }
  return out;
}

struct PairCounts {
  // One slot per input table; BPE uses slot 0 only.
  std::array<std::int64_t, 2> by_table{0, 0};
  std::int64_t total() const { return by_table[0] + by_table[1]; }
};

// Holds the symbolized corpus during merge training and keeps adjacent-pair
// counts incrementally: after a merge only the words containing the merged
// pair are recounted.
class MergeEngine {
 public:
  MergeEngine(std::span<const WordFrequencyTable* const> tables, MarkerStyle style) {
    if (tables.empty() || tables.size() > 2) {
      throw ContractError("MergeEngine: expected one or two word tables");
    }
    for (std::size_t t = 0; t < tables.size(); ++t) {
      for (const auto& [word, count] : *tables[t]) {
        if (count == 0) throw ContractError("MergeEngine: zero word count");
        Word w;
        w.syms = word_symbols(word, style);
        w.count = count;
        w.table = t;
        for (const std::string& s : w.syms) alphabet_.insert(s);
        words_.push_back(std::move(w));
      }
    }
    for (std::size_t i = 0; i < words_.size(); ++i) add_word(i, +1, nullptr);
  }

  const std::map<SymbolPair, PairCounts>& pairs() const { return pair_counts_; }
  const std::set<std::string>& alphabet() const { return alphabet_; }

  // Applies the merge corpus-wide; returns the sorted set of pairs whose
  // counts changed (including the merged pair itself, now absent).
  std::vector<SymbolPair> apply_merge(const SymbolPair& pair) {
    std::set<SymbolPair> touched;
    auto holders = pair_words_.find(pair);
    if (holders == pair_words_.end()) {
      throw ContractError("MergeEngine: merge pair no longer present");
    }
    const std::vector<std::size_t> affected(holders->second.begin(),
                                            holders->second.end());
    for (std::size_t idx : affected) {
      add_word(idx, -1, &touched);
      words_[idx].syms = apply_merge_to_symbols(words_[idx].syms, pair);
      add_word(idx, +1, &touched);
    }
    return std::vector<SymbolPair>(touched.begin(), touched.end());
  }

  // Encoded corpus size under the current symbolization.
  std::uint64_t total_tokens() const {
    std::uint64_t total = 0;
    for (const Word& w : words_) total += w.count * w.syms.size();
    return total;
  }

 private:
  struct Word {
    std::vector<std::string> syms;
    std::uint64_t count = 0;
    std::size_t table = 0;
  };

  void add_word(std::size_t idx, int sign, std::set<SymbolPair>* touched) {
    const Word& w = words_[idx];
    const std::int64_t delta =
        sign * static_cast<std::int64_t>(w.count);
    for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) {
      SymbolPair p{w.syms[i], w.syms[i + 1]};
      auto& counts = pair_counts_[p];
      counts.by_table[w.table] += delta;
      if (touched) touched->insert(p);
      if (sign > 0) {
        pair_words_[p].insert(idx);
      } else if (counts.by_table[0] == 0 && counts.by_table[1] == 0) {
        pair_counts_.erase(p);
        pair_words_.erase(p);
      }
    }
    if (sign < 0) {
      // A pair can survive with a reduced count while this word no longer
      // holds it; recompute membership from the rewritten symbols later.
      for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) {
        SymbolPair p{w.syms[i], w.syms[i + 1]};
        auto it = pair_words_.find(p);
        if (it != pair_words_.end()) it->second.erase(idx);
      }
    }
  }

  std::vector<Word> words_;
  std::set<std::string> alphabet_;
  std::map<SymbolPair, PairCounts> pair_counts_;
  std::map<SymbolPair, std::set<std::size_t>> pair_words_;
};

}  // namespace toklab::detail
