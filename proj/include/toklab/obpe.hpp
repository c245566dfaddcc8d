#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toklab/bpe.hpp"
#include "toklab/detail/merge_engine.hpp"
#include "toklab/errors.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

// Exponent of the generalized mean. Negative infinity is a distinct variant,
// not a large negative float, so f^p never overflows.
class MeanExponent {
 public:
  static MeanExponent neg_infinity() { return MeanExponent(true, 0.0); }
  static MeanExponent finite(double p) {
    if (!std::isfinite(p)) throw ContractError("MeanExponent: non-finite exponent");
    if (p > 1.0) throw ContractError("MeanExponent: exponent must be <= 1");
    return MeanExponent(false, p);
  }

  bool is_neg_infinity() const { return neg_inf_; }
  double value() const {
    if (neg_inf_) throw ContractError("MeanExponent: no finite value");
    return value_;
  }

  std::string to_string() const {
    return neg_inf_ ? "-inf" : detail::format_double(value_);
  }

  // Accepts a decimal <= 1 or the literal "-inf".
  static MeanExponent parse(std::string_view s) {
    if (s == "-inf") return neg_infinity();
    try {
      return finite(detail::parse_double(s, "mean exponent"));
    } catch (const ModelIoError&) {
      throw UsageError("bad mean exponent \"" + std::string(s) +
                       "\" (expected a decimal <= 1 or -inf)");
    } catch (const ContractError&) {
      throw UsageError("mean exponent must be <= 1 (got \"" + std::string(s) + "\")");
    }
  }

  bool operator==(const MeanExponent& o) const {
    return neg_inf_ == o.neg_inf_ && (neg_inf_ || value_ == o.value_);
  }

 private:
  MeanExponent(bool neg_inf, double value) : neg_inf_(neg_inf), value_(value) {}
  bool neg_inf_;
  double value_;
};

// Generalized mean M_p of two non-negative frequencies. p = 1 is the
// arithmetic mean, p = 0 the geometric mean, p = -inf the minimum; finite
// nonzero p is evaluated in log space for stability.
inline double generalized_mean(double f_i, double f_h, MeanExponent p) {
  if (f_i < 0 || f_h < 0) throw ContractError("generalized_mean: negative frequency");
  if (p.is_neg_infinity()) return std::min(f_i, f_h);
  const double pv = p.value();
  if (f_i == 0.0 && f_h == 0.0) return 0.0;
  if (pv <= 0.0 && (f_i == 0.0 || f_h == 0.0)) return 0.0;
  if (pv == 0.0) return std::exp(0.5 * (std::log(f_i) + std::log(f_h)));
  // Here pv > 0 may still see one zero operand: (f^p / 2)^(1/p).
  if (f_i == 0.0) return f_h * std::exp(std::log(0.5) / pv);
  if (f_h == 0.0) return f_i * std::exp(std::log(0.5) / pv);
  const double a = pv * std::log(f_i);
  const double b = pv * std::log(f_h);
  const double m = std::max(a, b);
  return std::exp((m + std::log(0.5 * (std::exp(a - m) + std::exp(b - m)))) / pv);
}

struct ObpeConfig {
  std::size_t vocab_size = 5000;
  double alpha = 0.5;
  MeanExponent p = MeanExponent::neg_infinity();
  MarkerStyle marker_style = MarkerStyle::kEndOfWordSuffix;
  std::string unk_token = std::string(kDefaultUnkToken);

  void validate() const {
    if (alpha < 0.0 || alpha > 1.0) {
      throw ContractError("ObpeConfig: alpha must lie in [0, 1]");
    }
  }
};

struct BilingualTables {
  WordFrequencyTable high;  // transfer source
  WordFrequencyTable low;   // target
};

// Merge score: alpha weights raw total frequency against the overlap term,
// which doubles the generalized mean of the per-language frequencies. At
// alpha = 1 this is plain BPE on the pooled table.
inline double pair_score(std::int64_t f_i, std::int64_t f_h, const ObpeConfig& config) {
  config.validate();
  if (f_i < 0 || f_h < 0) throw ContractError("pair_score: negative frequency");
  const double fi = static_cast<double>(f_i);
  const double fh = static_cast<double>(f_h);
  return config.alpha * (fi + fh) +
         (1.0 - config.alpha) * 2.0 * generalized_mean(fi, fh, config.p);
}

namespace detail {

struct ObpeHeapEntry {
  double score;
  std::int64_t total;
  SymbolPair pair;
  // Highest score first; ties by higher raw total, then smaller pair.
  bool operator<(const ObpeHeapEntry& other) const {
    if (score != other.score) return score < other.score;
    if (total != other.total) return total < other.total;
    return pair > other.pair;
  }
};

}  // namespace detail

// Trains overlap-aware merges over both languages at once: candidate pairs
// come from the union of both corpora and every chosen merge re-symbolizes
// both sides.
inline TokenizerModel train_obpe(const BilingualTables& tables, const ObpeConfig& config) {
  config.validate();
  if (tables.high.empty() || tables.low.empty()) {
    throw ContractError("train_obpe: empty word table");
  }
  // Slot 0 carries the low-resource (target) counts f_i, slot 1 the
  // high-resource counts f_h.
  const WordFrequencyTable* table_ptrs[] = {&tables.low, &tables.high};
  detail::MergeEngine engine(table_ptrs, config.marker_style);

  const std::size_t reserved = 1;
  const std::size_t base = engine.alphabet().size() + reserved;
  if (config.vocab_size < base) {
    throw ContractError("train_obpe: vocab_size " + std::to_string(config.vocab_size) +
                        " is below the " + std::to_string(base) +
                        " base symbols and reserved tokens");
  }
  const std::size_t budget = config.vocab_size - base;

  auto score_of = [&](const detail::PairCounts& counts) {
    return pair_score(counts.by_table[0], counts.by_table[1], config);
  };

  std::priority_queue<detail::ObpeHeapEntry> heap;
  for (const auto& [pair, counts] : engine.pairs()) {
    heap.push({score_of(counts), counts.total(), pair});
  }

  TokenizerModel model;
  model.paradigm = Paradigm::kObpe;
  model.marker_style = config.marker_style;
  model.unk_token = config.unk_token;

  while (model.merges.size() < budget && !heap.empty()) {
    const detail::ObpeHeapEntry top = heap.top();
    heap.pop();
    auto it = engine.pairs().find(top.pair);
    if (it == engine.pairs().end() || it->second.total() != top.total ||
        score_of(it->second) != top.score) {
      continue;  // stale snapshot
    }
    model.merges.push_back(top.pair);
    for (const detail::SymbolPair& p : engine.apply_merge(top.pair)) {
      auto live = engine.pairs().find(p);
      if (live != engine.pairs().end()) {
        heap.push({score_of(live->second), live->second.total(), p});
      }
    }
  }

  model.vocab.add(model.unk_token);
  for (const std::string& sym : engine.alphabet()) model.vocab.add(sym);
  for (const auto& [left, right] : model.merges) model.vocab.add(left + right);
  return model;
}

// Diagnostic: how many vocabulary tokens the two corpora share once each is
// segmented by the model.
inline std::size_t shared_token_count(const TokenizerModel& model,
                                      const WordFrequencyTable& a,
                                      const WordFrequencyTable& b) {
  const auto ranks = detail::merge_ranks(model);
  auto emitted = [&](const WordFrequencyTable& table) {
    std::set<std::string> seen;
    for (const auto& [word, count] : table) {
      (void)count;
      for (std::string& tok : detail::encode_bpe_word(model, ranks, word)) {
        seen.insert(std::move(tok));
      }
    }
    return seen;
  };
  const std::set<std::string> sa = emitted(a);
  const std::set<std::string> sb = emitted(b);
  std::size_t shared = 0;
  for (const std::string& tok : sa) {
    if (sb.count(tok)) ++shared;
  }
  return shared;
}

}  // namespace toklab
