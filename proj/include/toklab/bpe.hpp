#pragma once

#include <cstdint>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "toklab/detail/merge_engine.hpp"
#include "toklab/errors.hpp"
#include "toklab/text.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

namespace detail {

// Heap entry for the most-frequent-pair selection. Ordered by count, ties by
// the lexicographically smaller pair; entries are snapshots validated against
// the live counts when popped.
struct BpeHeapEntry {
  std::int64_t count;
  SymbolPair pair;
  bool operator<(const BpeHeapEntry& other) const {
    if (count != other.count) return count < other.count;
    return pair > other.pair;  // smaller pair wins
  }
};

}  // namespace detail

// Learns merges until the vocabulary budget is reached or no adjacent pair is
// left. The budget covers the unk token, every base symbol (characters plus
// the boundary marker) and one entry per merge.
inline TokenizerModel train_bpe(const WordFrequencyTable& table,
                                std::size_t vocab_size,
                                MarkerStyle style = MarkerStyle::kEndOfWordSuffix,
                                std::string unk_token = std::string(kDefaultUnkToken)) {
  if (table.empty()) throw ContractError("train_bpe: empty word table");
  const WordFrequencyTable* tables[] = {&table};
  detail::MergeEngine engine(tables, style);

  const std::size_t reserved = 1;  // unk
  const std::size_t base = engine.alphabet().size() + reserved;
  if (vocab_size < base) {
    throw ContractError("train_bpe: vocab_size " + std::to_string(vocab_size) +
                        " is below the " + std::to_string(base) +
                        " base symbols and reserved tokens");
  }
  const std::size_t budget = vocab_size - base;

  std::priority_queue<detail::BpeHeapEntry> heap;
  for (const auto& [pair, counts] : engine.pairs()) {
    heap.push({counts.total(), pair});
  }

  TokenizerModel model;
  model.paradigm = Paradigm::kBpe;
  model.marker_style = style;
  model.unk_token = std::move(unk_token);

  while (model.merges.size() < budget && !heap.empty()) {
    const detail::BpeHeapEntry top = heap.top();
    heap.pop();
    auto it = engine.pairs().find(top.pair);
    if (it == engine.pairs().end() || it->second.total() != top.count) {
      continue;  // stale snapshot
    }
    model.merges.push_back(top.pair);
    for (const detail::SymbolPair& p : engine.apply_merge(top.pair)) {
      auto live = engine.pairs().find(p);
      if (live != engine.pairs().end()) {
        heap.push({live->second.total(), p});
      }
    }
  }

  model.vocab.add(model.unk_token);
  for (const std::string& sym : engine.alphabet()) model.vocab.add(sym);
  for (const auto& [left, right] : model.merges) model.vocab.add(left + right);
  return model;
}

namespace detail {

// Replays the merge list over one word's symbols. Applying the lowest-ranked
// adjacent pair first is equivalent to replaying merges in training order,
// because a merge can only create pairs of later rank.
inline std::vector<std::string> replay_merges(
    std::vector<std::string> syms,
    const std::map<SymbolPair, std::size_t>& ranks) {
  for (;;) {
    std::size_t best_rank = ranks.size();
    SymbolPair best_pair;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      auto it = ranks.find(SymbolPair{syms[i], syms[i + 1]});
      if (it != ranks.end() && it->second < best_rank) {
        best_rank = it->second;
        best_pair = it->first;
      }
    }
    if (best_rank == ranks.size()) return syms;
    syms = apply_merge_to_symbols(syms, best_pair);
  }
}

inline std::map<SymbolPair, std::size_t> merge_ranks(const TokenizerModel& model) {
  std::map<SymbolPair, std::size_t> ranks;
  for (std::size_t i = 0; i < model.merges.size(); ++i) {
    ranks.emplace(model.merges[i], i);  // keep first rank on duplicates
  }
  return ranks;
}

inline std::vector<std::string> encode_bpe_word(
    const TokenizerModel& model, const std::map<SymbolPair, std::size_t>& ranks,
    std::string_view word) {
  std::vector<std::string> syms =
      replay_merges(word_symbols(word, model.marker_style), ranks);
  for (std::string& s : syms) {
    if (!model.vocab.contains(s)) s = model.unk_token;
  }
  return syms;
}

}  // namespace detail

// Encodes text with a merge-based model: NFKC, whitespace split, then per
// word the marker is attached and the merges replayed in training order.
// Characters outside the vocabulary become the unk token.
inline std::vector<std::string> encode_bpe(const TokenizerModel& model,
                                           std::string_view text) {
  if (model.paradigm != Paradigm::kBpe && model.paradigm != Paradigm::kObpe) {
    throw ContractError("encode_bpe: model is not merge-based");
  }
  const auto ranks = detail::merge_ranks(model);
  std::vector<std::string> out;
  for (const std::string& word : split_whitespace(normalize(text))) {
    for (std::string& tok : detail::encode_bpe_word(model, ranks, word)) {
      out.push_back(std::move(tok));
    }
  }
  return out;
}

}  // namespace toklab
