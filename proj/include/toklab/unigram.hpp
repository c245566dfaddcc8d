#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toklab/errors.hpp"
#include "toklab/rng.hpp"
#include "toklab/text.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

// Current token scores during unigram training. Ordered so every reduction
// over it runs in a platform-independent order.
using LogProbTable = std::map<std::string, double>;

struct UnigramTrainerConfig {
  std::size_t vocab_size = 5000;
  // The seed vocabulary is capped at seed_size_factor * vocab_size entries.
  double seed_size_factor = 20.0;
  std::size_t max_seed_token_len = 16;
  // Fraction of the vocabulary dropped per prune round.
  double prune_fraction = 0.25;
  // EM steps between prune rounds (and after the last one).
  std::size_t em_subiters = 2;
  MarkerStyle marker_style = MarkerStyle::kWordInitialUnderscore;
  std::string unk_token = std::string(kDefaultUnkToken);

  void validate() const {
    if (vocab_size == 0) throw ContractError("UnigramTrainerConfig: vocab_size is zero");
    if (!(seed_size_factor >= 1.0)) {
      throw ContractError("UnigramTrainerConfig: seed_size_factor must be >= 1");
    }
    if (max_seed_token_len == 0) {
      throw ContractError("UnigramTrainerConfig: max_seed_token_len is zero");
    }
    if (!(prune_fraction > 0.0) || !(prune_fraction < 1.0)) {
      throw ContractError("UnigramTrainerConfig: prune_fraction must lie in (0, 1)");
    }
    if (em_subiters == 0) throw ContractError("UnigramTrainerConfig: em_subiters is zero");
  }
};

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(const std::vector<double>& vals) {
  double m = kNegInf;
  for (double v : vals) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : vals) s += std::exp(v - m);
  return m + std::log(s);
}

struct LatticeEdge {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string token;
  double lp = 0.0;
  bool unk = false;
};

// Builds all segmentation edges of one word. lp_of returns the token score or
// nullopt; zero-probability tokens are treated as absent. When unk_token is
// given, positions whose character has no entry get a penalty edge, which
// also keeps the lattice connected.
template <typename Lookup>
std::vector<LatticeEdge> build_lattice(const std::vector<std::string>& cps,
                                       std::size_t max_token_len, Lookup&& lp_of,
                                       const std::string* unk_token) {
  std::vector<LatticeEdge> edges;
  const std::size_t n = cps.size();
  for (std::size_t i = 0; i < n; ++i) {
    bool char_known = false;
    std::string piece;
    for (std::size_t len = 1; len <= max_token_len && i + len <= n; ++len) {
      piece += cps[i + len - 1];
      const std::optional<double> lp = lp_of(std::string_view(piece));
      if (!lp || *lp == kNegInf) continue;
      if (len == 1) char_known = true;
      edges.push_back({i, i + len, piece, *lp, false});
    }
    if (!char_known && unk_token != nullptr) {
      edges.push_back({i, i + 1, *unk_token, kUnkLogProb, true});
    }
  }
  return edges;
}

// Maximum-score segmentation; exact score ties prefer fewer tokens, then the
// lexicographically smaller token sequence. Returns nullopt when no path
// spans the word.
template <typename Lookup>
std::optional<std::pair<std::vector<std::string>, double>> viterbi_segment(
    const std::vector<std::string>& cps, std::size_t max_token_len, Lookup&& lp_of,
    const std::string* unk_token) {
  const std::size_t n = cps.size();
  if (n == 0) return std::make_pair(std::vector<std::string>{}, 0.0);
  const auto edges = build_lattice(cps, max_token_len, lp_of, unk_token);

  struct Node {
    bool reached = false;
    double score = kNegInf;
    std::size_t count = 0;
    std::vector<std::string> seq;
  };
  std::vector<Node> nodes(n + 1);
  nodes[0].reached = true;
  nodes[0].score = 0.0;

  // Edges are grouped by end position below; words are short enough that a
  // simple scan per node is fine.
  for (std::size_t j = 1; j <= n; ++j) {
    Node& node = nodes[j];
    for (const LatticeEdge& e : edges) {
      if (e.end != j || !nodes[e.begin].reached) continue;
      const Node& prev = nodes[e.begin];
      const double score = prev.score + e.lp;
      const std::size_t count = prev.count + 1;
      bool better = false;
      if (!node.reached || score > node.score) {
        better = true;
      } else if (score == node.score) {
        if (count < node.count) {
          better = true;
        } else if (count == node.count) {
          std::vector<std::string> cand = prev.seq;
          cand.push_back(e.token);
          if (cand < node.seq) {
            node.seq = std::move(cand);
            continue;
          }
          continue;
        }
      }
      if (better) {
        node.reached = true;
        node.score = score;
        node.count = count;
        node.seq = prev.seq;
        node.seq.push_back(e.token);
      }
    }
  }
  if (!nodes[n].reached) return std::nullopt;
  return std::make_pair(std::move(nodes[n].seq), nodes[n].score);
}

inline std::size_t max_key_codepoints(const LogProbTable& lp) {
  std::size_t m = 1;
  for (const auto& [tok, v] : lp) {
    (void)v;
    m = std::max(m, codepoint_count(tok));
  }
  return m;
}

inline void check_normalized(const LogProbTable& lp, const char* who) {
  if (lp.empty()) throw ContractError(std::string(who) + ": empty log_probs");
  double sum = 0.0;
  for (const auto& [tok, v] : lp) {
    if (v > 0.0 || std::isnan(v)) {
      throw ContractError(std::string(who) + ": positive log-probability for \"" + tok + "\"");
    }
    sum += std::exp(v);
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ContractError(std::string(who) + ": log_probs are not normalized");
  }
}

}  // namespace detail

// All substrings up to max_seed_token_len code points, frequency-weighted by
// word counts; overlapping occurrences all count. Single characters are
// always kept; the rest is the most frequent substrings up to the cap.
inline std::map<std::string, std::uint64_t> seed_vocabulary(
    const WordFrequencyTable& table, const UnigramTrainerConfig& config) {
  config.validate();
  if (table.empty()) throw ContractError("seed_vocabulary: empty word table");

  std::map<std::string, std::uint64_t> chars;
  std::map<std::string, std::uint64_t> multis;
  for (const auto& [word, count] : table) {
    const std::vector<std::string> cps = codepoints(word);
    for (std::size_t i = 0; i < cps.size(); ++i) {
      std::string piece;
      const std::size_t max_len = std::min(config.max_seed_token_len, cps.size() - i);
      for (std::size_t len = 1; len <= max_len; ++len) {
        piece += cps[i + len - 1];
        if (len == 1) {
          chars[piece] += count;
        } else {
          multis[piece] += count;
        }
      }
    }
  }

  const std::size_t cap = static_cast<std::size_t>(config.seed_size_factor *
                                                   static_cast<double>(config.vocab_size));
  std::map<std::string, std::uint64_t> seed = chars;
  if (seed.size() < cap && !multis.empty()) {
    std::vector<std::pair<std::string, std::uint64_t>> ranked(multis.begin(), multis.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    const std::size_t room = cap - seed.size();
    for (std::size_t i = 0; i < ranked.size() && i < room; ++i) {
      seed.insert(ranked[i]);
    }
  }
  return seed;
}

struct ExpectedCounts {
  std::map<std::string, double> counts;
  double log_likelihood = 0.0;
};

// E-step: posterior-expected token counts over all segmentations of every
// word, plus the corpus log-likelihood under the given scores.
inline ExpectedCounts expected_counts(const WordFrequencyTable& table,
                                      const LogProbTable& log_probs) {
  if (table.empty()) throw ContractError("expected_counts: empty word table");
  detail::check_normalized(log_probs, "expected_counts");
  const std::size_t max_len = detail::max_key_codepoints(log_probs);
  auto lp_of = [&](std::string_view tok) -> std::optional<double> {
    auto it = log_probs.find(std::string(tok));
    if (it == log_probs.end()) return std::nullopt;
    return it->second;
  };

  ExpectedCounts result;
  for (const auto& [word, count] : table) {
    const std::vector<std::string> cps = codepoints(word);
    for (const std::string& cp : cps) {
      if (!log_probs.count(cp)) {
        throw TrainError("word \"" + word + "\" contains character \"" + cp +
                         "\" missing from the vocabulary");
      }
    }
    const auto edges = detail::build_lattice(cps, max_len, lp_of, nullptr);
    const std::size_t n = cps.size();

    std::vector<double> alpha(n + 1, detail::kNegInf);
    std::vector<double> beta(n + 1, detail::kNegInf);
    alpha[0] = 0.0;
    std::vector<double> incoming;
    for (std::size_t j = 1; j <= n; ++j) {
      incoming.clear();
      for (const auto& e : edges) {
        if (e.end == j && alpha[e.begin] != detail::kNegInf) {
          incoming.push_back(alpha[e.begin] + e.lp);
        }
      }
      alpha[j] = detail::log_sum_exp(incoming);
    }
    beta[n] = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      incoming.clear();
      for (const auto& e : edges) {
        if (e.begin == i && beta[e.end] != detail::kNegInf) {
          incoming.push_back(e.lp + beta[e.end]);
        }
      }
      beta[i] = detail::log_sum_exp(incoming);
    }

    const double ll = alpha[n];
    if (ll == detail::kNegInf) {
      throw TrainError("word \"" + word + "\" has no segmentation under the vocabulary");
    }
    result.log_likelihood += static_cast<double>(count) * ll;
    for (const auto& e : edges) {
      if (alpha[e.begin] == detail::kNegInf || beta[e.end] == detail::kNegInf) continue;
      const double post = std::exp(alpha[e.begin] + e.lp + beta[e.end] - ll);
      result.counts[e.token] += static_cast<double>(count) * post;
    }
  }
  // Tokens never reachable in any word keep an explicit zero.
  for (const auto& [tok, lp] : log_probs) {
    (void)lp;
    result.counts.try_emplace(tok, 0.0);
  }
  return result;
}

// One EM step. Returns the re-estimated scores and the corpus log-likelihood
// under the INPUT scores, so successive calls report a monotone sequence.
inline std::pair<LogProbTable, double> em_step(const WordFrequencyTable& table,
                                               const LogProbTable& log_probs) {
  ExpectedCounts e = expected_counts(table, log_probs);

  double total = 0.0;
  for (const auto& [tok, c] : e.counts) total += c;
  if (!(total > 0.0)) throw TrainError("em_step: no expected counts");

  // Characters act as the fallback alphabet and must stay usable, so their
  // counts are floored at a mass far below one real observation.
  const double floor = total * 1e-12;
  double floored_total = 0.0;
  for (auto& [tok, c] : e.counts) {
    if (detail::is_base_symbol(tok)) c = std::max(c, floor);
    floored_total += c;
  }

  LogProbTable out;
  for (const auto& [tok, c] : e.counts) {
    out[tok] = c > 0.0 ? std::log(c / floored_total) : detail::kNegInf;
  }
  return {std::move(out), e.log_likelihood};
}

// Removes the prune_fraction of tokens with the smallest Viterbi-likelihood
// loss, never dropping single characters and never going below vocab_size.
// Survivor scores are renormalized.
inline LogProbTable prune_round(const WordFrequencyTable& table,
                                const LogProbTable& log_probs,
                                const UnigramTrainerConfig& config) {
  config.validate();
  if (table.empty()) throw ContractError("prune_round: empty word table");
  detail::check_normalized(log_probs, "prune_round");

  const std::size_t old_size = log_probs.size();
  const std::size_t shrunk = static_cast<std::size_t>(
      std::floor(static_cast<double>(old_size) * (1.0 - config.prune_fraction)));
  const std::size_t target = std::max(config.vocab_size, shrunk);
  if (old_size <= target) return log_probs;

  const std::size_t max_len = detail::max_key_codepoints(log_probs);
  auto lp_of = [&](std::string_view tok) -> std::optional<double> {
    auto it = log_probs.find(std::string(tok));
    if (it == log_probs.end()) return std::nullopt;
    return it->second;
  };

  // Viterbi path and score per word under the current scores.
  struct WordState {
    const std::string* word;
    std::uint64_t count;
    double score;
  };
  std::vector<WordState> states;
  std::map<std::string, std::vector<std::size_t>> usage;
  for (const auto& [word, count] : table) {
    const std::vector<std::string> cps = codepoints(word);
    auto best = detail::viterbi_segment(cps, max_len, lp_of, nullptr);
    if (!best) {
      throw TrainError("word \"" + word + "\" has no segmentation under the vocabulary");
    }
    states.push_back({&word, count, best->second});
    for (const std::string& tok : best->first) {
      usage[tok].push_back(states.size() - 1);
    }
  }

  // Loss of deleting a token: only words whose Viterbi path uses it change.
  std::vector<std::pair<double, std::string>> candidates;
  for (const auto& [tok, lp] : log_probs) {
    (void)lp;
    if (detail::is_base_symbol(tok)) continue;
    auto used = usage.find(tok);
    if (used == usage.end()) {
      candidates.emplace_back(0.0, tok);
      continue;
    }
    auto masked = [&](std::string_view t) -> std::optional<double> {
      if (t == tok) return std::nullopt;
      return lp_of(t);
    };
    double loss = 0.0;
    for (std::size_t idx : used->second) {
      const WordState& ws = states[idx];
      auto without = detail::viterbi_segment(codepoints(*ws.word), max_len, masked, nullptr);
      if (!without) {
        throw TrainError("word \"" + *ws.word + "\" would lose all segmentations");
      }
      loss += static_cast<double>(ws.count) * (ws.score - without->second);
    }
    candidates.emplace_back(loss, tok);
  }

  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });

  const std::size_t to_remove = std::min(old_size - target, candidates.size());
  LogProbTable pruned = log_probs;
  for (std::size_t i = 0; i < to_remove; ++i) pruned.erase(candidates[i].second);

  std::vector<double> lps;
  lps.reserve(pruned.size());
  for (const auto& [tok, lp] : pruned) {
    (void)tok;
    lps.push_back(lp);
  }
  const double log_norm = detail::log_sum_exp(lps);
  for (auto& [tok, lp] : pruned) {
    (void)tok;
    if (lp != detail::kNegInf) lp -= log_norm;
  }
  return pruned;
}

struct UnigramTrainReport {
  std::size_t seed_size = 0;
  std::size_t prune_rounds = 0;
  double final_log_likelihood = 0.0;
};

// Seeds from substring counts, then alternates EM with prune rounds until the
// budget (including the unk entry) is reached, and runs the final EM steps.
inline TokenizerModel train_unigram(const WordFrequencyTable& table,
                                    const UnigramTrainerConfig& config,
                                    UnigramTrainReport* report = nullptr) {
  config.validate();
  if (table.empty()) throw ContractError("train_unigram: empty word table");

  const auto seed = seed_vocabulary(table, config);
  std::size_t protected_count = 0;
  for (const auto& [tok, c] : seed) {
    (void)c;
    if (detail::is_base_symbol(tok)) ++protected_count;
  }
  if (config.vocab_size < protected_count + 1) {
    throw ContractError("train_unigram: vocab_size " + std::to_string(config.vocab_size) +
                        " cannot hold " + std::to_string(protected_count) +
                        " characters plus the unk token");
  }
  // The unk entry occupies one vocabulary slot.
  const std::size_t target = config.vocab_size - 1;
  UnigramTrainerConfig prune_config = config;
  prune_config.vocab_size = target;

  double seed_total = 0.0;
  for (const auto& [tok, c] : seed) {
    (void)tok;
    seed_total += static_cast<double>(c);
  }
  LogProbTable lp;
  for (const auto& [tok, c] : seed) {
    lp[tok] = std::log(static_cast<double>(c) / seed_total);
  }

  UnigramTrainReport local;
  local.seed_size = seed.size();
  double ll = 0.0;
  while (true) {
    for (std::size_t k = 0; k < config.em_subiters; ++k) {
      std::tie(lp, ll) = em_step(table, lp);
    }
    if (lp.size() <= target) break;
    lp = prune_round(table, lp, prune_config);
    ++local.prune_rounds;
  }
  for (std::size_t k = 0; k < config.em_subiters; ++k) {
    std::tie(lp, ll) = em_step(table, lp);
  }
  local.final_log_likelihood = ll;
  if (report != nullptr) *report = local;

  TokenizerModel model;
  model.paradigm = Paradigm::kUnigram;
  model.marker_style = config.marker_style;
  model.unk_token = config.unk_token;
  model.vocab.add(model.unk_token);
  model.log_probs.push_back(kUnkLogProb);
  for (const auto& [tok, v] : lp) {
    model.vocab.add(tok);
    model.log_probs.push_back(v);
  }
  return model;
}

namespace detail {

// The trainer sees markers as ordinary characters of its input words, so a
// model carries marked tokens only if its training table was marked. The
// marker's first code point is a trained character exactly in that case.
inline bool model_marks_words(const TokenizerModel& model) {
  const std::string_view marker = marker_token(model.marker_style);
  return model.vocab.contains(codepoints(marker)[0]);
}

inline std::string mark_word(const std::string& word, MarkerStyle style) {
  return style == MarkerStyle::kWordInitialUnderscore
             ? std::string(kWordInitialMarker) + word
             : word + std::string(kEndOfWordMarker);
}

inline std::size_t max_vocab_codepoints(const TokenizerModel& model) {
  std::size_t m = 1;
  for (const std::string& tok : model.vocab.tokens()) {
    m = std::max(m, codepoint_count(tok));
  }
  return m;
}

}  // namespace detail

// Maximum-likelihood segmentation of whitespace-split, NFKC-normalized text.
// Unknown characters surface as the unk token.
inline std::vector<std::string> encode_viterbi(const TokenizerModel& model,
                                               std::string_view text) {
  if (model.paradigm != Paradigm::kUnigram) {
    throw ContractError("encode_viterbi: model is not a unigram model");
  }
  const bool mark = detail::model_marks_words(model);
  const std::size_t max_len = detail::max_vocab_codepoints(model);
  auto lp_of = [&](std::string_view tok) -> std::optional<double> {
    if (tok == model.unk_token) return std::nullopt;  // only via penalty edges
    const auto id = model.vocab.id_of(tok);
    if (!id) return std::nullopt;
    return model.log_probs[static_cast<std::size_t>(*id)];
  };

  std::vector<std::string> out;
  for (const std::string& word : split_whitespace(normalize(text))) {
    const std::string prepared = mark ? detail::mark_word(word, model.marker_style) : word;
    auto best = detail::viterbi_segment(codepoints(prepared), max_len, lp_of,
                                        &model.unk_token);
    if (!best) throw ContractError("encode_viterbi: disconnected lattice");
    for (std::string& tok : best->first) out.push_back(std::move(tok));
  }
  return out;
}

// Samples a segmentation per word by forward filtering over scores scaled by
// 1/temperature, then backward edge sampling. temperature -> 0 approaches the
// Viterbi segmentation; higher values flatten the distribution.
inline std::vector<std::string> encode_sampled(const TokenizerModel& model,
                                               std::string_view text,
                                               double temperature,
                                               std::uint64_t seed) {
  if (model.paradigm != Paradigm::kUnigram) {
    throw ContractError("encode_sampled: model is not a unigram model");
  }
  if (!(temperature > 0.0)) {
    throw ContractError("encode_sampled: temperature must be positive");
  }
  const bool mark = detail::model_marks_words(model);
  const std::size_t max_len = detail::max_vocab_codepoints(model);
  auto lp_of = [&](std::string_view tok) -> std::optional<double> {
    if (tok == model.unk_token) return std::nullopt;
    const auto id = model.vocab.id_of(tok);
    if (!id) return std::nullopt;
    return model.log_probs[static_cast<std::size_t>(*id)];
  };

  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  for (const std::string& word : split_whitespace(normalize(text))) {
    const std::string prepared = mark ? detail::mark_word(word, model.marker_style) : word;
    const std::vector<std::string> cps = codepoints(prepared);
    const std::size_t n = cps.size();
    if (n == 0) continue;
    auto edges = detail::build_lattice(cps, max_len, lp_of, &model.unk_token);
    for (auto& e : edges) e.lp /= temperature;

    std::vector<double> alpha(n + 1, detail::kNegInf);
    alpha[0] = 0.0;
    std::vector<double> incoming;
    for (std::size_t j = 1; j <= n; ++j) {
      incoming.clear();
      for (const auto& e : edges) {
        if (e.end == j && alpha[e.begin] != detail::kNegInf) {
          incoming.push_back(alpha[e.begin] + e.lp);
        }
      }
      alpha[j] = detail::log_sum_exp(incoming);
    }
    if (alpha[n] == detail::kNegInf) {
      throw ContractError("encode_sampled: disconnected lattice");
    }

    std::vector<std::string> reversed;
    std::size_t pos = n;
    while (pos > 0) {
      const double r = uniform_unit(rng);
      double cumulative = 0.0;
      const detail::LatticeEdge* chosen = nullptr;
      for (const auto& e : edges) {
        if (e.end != pos || alpha[e.begin] == detail::kNegInf) continue;
        chosen = &e;
        cumulative += std::exp(alpha[e.begin] + e.lp - alpha[pos]);
        if (cumulative > r) break;
      }
      if (chosen == nullptr) {
        throw ContractError("encode_sampled: no incoming edge");
      }
      reversed.push_back(chosen->token);
      pos = chosen->begin;
    }
    out.insert(out.end(), reversed.rbegin(), reversed.rend());
  }
  return out;
}

}  // namespace toklab
