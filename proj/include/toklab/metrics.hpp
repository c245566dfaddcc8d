#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toklab/align.hpp"
#include "toklab/conllu.hpp"
#include "toklab/errors.hpp"
#include "toklab/tokenize.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

struct TagScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold occurrences
};

struct MetricReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;  // over tags with gold support > 0
  std::map<std::string, TagScores> per_tag;
  // confusion[gold][pred] = count; keys cover the union of both label sets
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
  std::size_t total = 0;
};

// Token-level accuracy, per-tag precision/recall/F1 and the confusion matrix.
// Every zero denominator scores zero rather than NaN.
inline MetricReport compute_metrics(std::span<const std::string> gold,
                                    std::span<const std::string> pred) {
  if (gold.size() != pred.size()) {
    throw ContractError("compute_metrics: gold/pred length mismatch");
  }
  if (gold.empty()) throw ContractError("compute_metrics: empty input");
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == kPadLabel || pred[i] == kPadLabel) {
      throw ContractError("compute_metrics: PAD label in input");
    }
  }

  MetricReport report;
  report.total = gold.size();
  std::map<std::string, std::size_t> gold_count, pred_count, hit_count;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++report.confusion[gold[i]][pred[i]];
    ++gold_count[gold[i]];
    ++pred_count[pred[i]];
    if (gold[i] == pred[i]) {
      ++hit_count[gold[i]];
      ++hits;
    }
  }
  report.accuracy = static_cast<double>(hits) / static_cast<double>(gold.size());

  std::vector<std::string> labels;
  for (const auto& [t, c] : gold_count) {
    (void)c;
    labels.push_back(t);
  }
  for (const auto& [t, c] : pred_count) {
    (void)c;
    if (!gold_count.count(t)) labels.push_back(t);
  }
  std::sort(labels.begin(), labels.end());

  // Square confusion matrix over the union of observed labels.
  for (const std::string& g : labels) {
    for (const std::string& p : labels) {
      report.confusion[g][p] += 0;
    }
  }

  double f1_sum = 0.0;
  std::size_t f1_n = 0;
  for (const std::string& t : labels) {
    TagScores s;
    const std::size_t tp = hit_count.count(t) ? hit_count[t] : 0;
    const std::size_t in_gold = gold_count.count(t) ? gold_count[t] : 0;
    const std::size_t in_pred = pred_count.count(t) ? pred_count[t] : 0;
    s.support = in_gold;
    s.precision = in_pred > 0 ? static_cast<double>(tp) / static_cast<double>(in_pred) : 0.0;
    s.recall = in_gold > 0 ? static_cast<double>(tp) / static_cast<double>(in_gold) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    report.per_tag[t] = s;
    if (in_gold > 0) {
      f1_sum += s.f1;
      ++f1_n;
    }
  }
  report.macro_f1 = f1_n > 0 ? f1_sum / static_cast<double>(f1_n) : 0.0;
  return report;
}

// Shannon entropy in bits of a tag count distribution.
inline double pos_entropy(const std::map<std::string, std::uint64_t>& tag_counts) {
  std::uint64_t total = 0;
  for (const auto& [tag, count] : tag_counts) {
    (void)tag;
    total += count;
  }
  if (total == 0) throw ContractError("pos_entropy: empty distribution");
  double h = 0.0;
  for (const auto& [tag, count] : tag_counts) {
    (void)tag;
    if (count == 0) continue;
    const double p = static_cast<double>(count) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

inline std::map<std::string, std::uint64_t> tag_distribution(
    std::span<const Sentence> sentences) {
  std::map<std::string, std::uint64_t> counts;
  for (const Sentence& s : sentences) {
    for (const Token& t : s.tokens) ++counts[t.upos];
  }
  return counts;
}

// Mean number of subwords the model spends per gold token.
inline double fertility(const TokenizerModel& model,
                        std::span<const Sentence> sentences) {
  std::uint64_t tokens = 0;
  std::uint64_t subwords = 0;
  for (const Sentence& s : sentences) {
    for (const Token& t : s.tokens) {
      ++tokens;
      subwords += encode(model, t.form).size();
    }
  }
  if (tokens == 0) return 0.0;
  return static_cast<double>(subwords) / static_cast<double>(tokens);
}

namespace detail {

// 1-based ranks; ties get the mean rank of their group.
inline std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

// Spearman rank correlation: Pearson over fractional ranks, so ties are
// handled by mean ranks. Undefined inputs (fewer than two points, zero rank
// variance) raise StatError.
inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("spearman_rho: length mismatch");
  if (x.size() < 2) throw StatError("correlation undefined for fewer than two points");
  const std::vector<double> rx = detail::fractional_ranks(x);
  const std::vector<double> ry = detail::fractional_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw StatError("correlation undefined under zero rank variance");
  }
  const double rho = sxy / std::sqrt(sxx * syy);
  return std::clamp(rho, -1.0, 1.0);
}

enum class Script { kLatin, kCyrillic };
enum class ResourceTier { kUnder = 0, kLow = 1, kMid = 2, kHigh = 3 };

inline std::string_view script_name(Script s) {
  return s == Script::kLatin ? "LATIN" : "CYRILLIC";
}
inline Script parse_script(std::string_view name) {
  if (name == "LATIN") return Script::kLatin;
  if (name == "CYRILLIC") return Script::kCyrillic;
  throw Error("unknown script \"" + std::string(name) + "\"");
}

inline std::string_view tier_name(ResourceTier t) {
  switch (t) {
    case ResourceTier::kUnder: return "UNDER";
    case ResourceTier::kLow: return "LOW";
    case ResourceTier::kMid: return "MID";
    case ResourceTier::kHigh: return "HIGH";
  }
  throw ContractError("tier_name: bad enum value");
}
inline ResourceTier parse_tier(std::string_view name) {
  if (name == "UNDER") return ResourceTier::kUnder;
  if (name == "LOW") return ResourceTier::kLow;
  if (name == "MID") return ResourceTier::kMid;
  if (name == "HIGH") return ResourceTier::kHigh;
  throw Error("unknown resource tier \"" + std::string(name) + "\"");
}

struct LanguageProfile {
  std::string code;
  std::size_t train_sentences = 0;
  ResourceTier tier = ResourceTier::kUnder;
  bool uralic_related = false;
  Script script = Script::kLatin;
};

struct GainRecord {
  std::string language;
  double delta_accuracy = 0.0;
  double delta_macro_f1 = 0.0;
};

struct CorrelationRow {
  std::string factor;
  // Empty when the factor (or the gain column) has zero variance.
  std::optional<double> rho_delta_accuracy;
  std::optional<double> rho_delta_macro_f1;
};

// Rank-correlates per-language gains against each profile factor. Ordinal
// encodings: tier HIGH=3..UNDER=0, relatedness and Latin script as 0/1.
// Zero-variance factors are reported as undefined, never dropped.
inline std::vector<CorrelationRow> correlate_gains(
    std::span<const GainRecord> gains, std::span<const LanguageProfile> profiles) {
  if (gains.size() < 2) {
    throw ContractError("correlate_gains: need at least two gain records");
  }
  std::map<std::string, const LanguageProfile*> by_code;
  for (const LanguageProfile& p : profiles) by_code[p.code] = &p;

  std::vector<double> d_acc, d_f1;
  std::vector<const LanguageProfile*> matched;
  for (const GainRecord& g : gains) {
    auto it = by_code.find(g.language);
    if (it == by_code.end()) {
      throw ContractError("correlate_gains: no profile for language \"" +
                          g.language + "\"");
    }
    matched.push_back(it->second);
    d_acc.push_back(g.delta_accuracy);
    d_f1.push_back(g.delta_macro_f1);
  }

  struct Factor {
    std::string name;
    std::vector<double> values;
  };
  std::vector<Factor> factors = {
      {"train_sentences", {}}, {"resource_tier", {}}, {"uralic_related", {}},
      {"latin_script", {}}};
  for (const LanguageProfile* p : matched) {
    factors[0].values.push_back(static_cast<double>(p->train_sentences));
    factors[1].values.push_back(static_cast<double>(static_cast<int>(p->tier)));
    factors[2].values.push_back(p->uralic_related ? 1.0 : 0.0);
    factors[3].values.push_back(p->script == Script::kLatin ? 1.0 : 0.0);
  }

  std::vector<CorrelationRow> rows;
  for (const Factor& f : factors) {
    CorrelationRow row;
    row.factor = f.name;
    try {
      row.rho_delta_accuracy = spearman_rho(f.values, d_acc);
    } catch (const StatError&) {
      row.rho_delta_accuracy = std::nullopt;
    }
    try {
      row.rho_delta_macro_f1 = spearman_rho(f.values, d_f1);
    } catch (const StatError&) {
      row.rho_delta_macro_f1 = std::nullopt;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace toklab
