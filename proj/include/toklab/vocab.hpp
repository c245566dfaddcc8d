#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "toklab/conllu.hpp"
#include "toklab/errors.hpp"
#include "toklab/text.hpp"

namespace toklab {

enum class Paradigm { kBpe, kUnigram, kObpe };
enum class MarkerStyle { kWordInitialUnderscore, kEndOfWordSuffix };

inline constexpr std::string_view kWordInitialMarker = "\xE2\x96\x81";  // U+2581
inline constexpr std::string_view kEndOfWordMarker = "</w>";
inline constexpr std::string_view kDefaultUnkToken = "<unk>";

// Log-probability charged per unknown character during decoding.
inline constexpr double kUnkLogProb = -20.0;

inline std::string_view marker_token(MarkerStyle style) {
  return style == MarkerStyle::kWordInitialUnderscore ? kWordInitialMarker
                                                      : kEndOfWordMarker;
}

inline MarkerStyle default_marker_style(Paradigm paradigm) {
  return paradigm == Paradigm::kUnigram ? MarkerStyle::kWordInitialUnderscore
                                        : MarkerStyle::kEndOfWordSuffix;
}

inline std::string_view paradigm_name(Paradigm p) {
  switch (p) {
    case Paradigm::kBpe: return "bpe";
    case Paradigm::kUnigram: return "unigram";
    case Paradigm::kObpe: return "obpe";
  }
  throw ContractError("paradigm_name: bad enum value");
}

inline Paradigm parse_paradigm(std::string_view name) {
  if (name == "bpe") return Paradigm::kBpe;
  if (name == "unigram") return Paradigm::kUnigram;
  if (name == "obpe") return Paradigm::kObpe;
  throw UsageError("unknown paradigm \"" + std::string(name) +
                   "\" (expected bpe, unigram or obpe)");
}

inline std::string_view marker_style_name(MarkerStyle s) {
  return s == MarkerStyle::kWordInitialUnderscore ? "word_initial_underscore"
                                                  : "end_of_word_suffix";
}

inline MarkerStyle parse_marker_style(std::string_view name) {
  if (name == "word_initial_underscore") return MarkerStyle::kWordInitialUnderscore;
  if (name == "end_of_word_suffix") return MarkerStyle::kEndOfWordSuffix;
  throw UsageError("unknown marker style \"" + std::string(name) +
                   "\" (expected word_initial_underscore or end_of_word_suffix)");
}

namespace detail {
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
};
struct StringEq {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const { return a == b; }
};
}  // namespace detail

// Bijection between token strings and dense ids 0..size-1.
class Vocabulary {
 public:
  // Adds the token if absent; returns its id either way.
  int add(std::string token) {
    auto it = ids_.find(token);
    if (it != ids_.end()) return it->second;
    const int id = static_cast<int>(tokens_.size());
    ids_.emplace(token, id);
    tokens_.push_back(std::move(token));
    return id;
  }

  std::optional<int> id_of(std::string_view token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view token) const { return ids_.count(token) > 0; }

  const std::string& token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      throw ContractError("Vocabulary::token: id out of range");
    }
    return tokens_[static_cast<std::size_t>(id)];
  }

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int, detail::StringHash, detail::StringEq> ids_;
};

struct TokenizerModel {
  Paradigm paradigm = Paradigm::kBpe;
  MarkerStyle marker_style = MarkerStyle::kEndOfWordSuffix;
  std::string unk_token = std::string(kDefaultUnkToken);
  Vocabulary vocab;
  // BPE/OBPE: merges in training order; replaying them is the encoder.
  std::vector<std::pair<std::string, std::string>> merges;
  // Unigram: log-probability per vocab id.
  std::vector<double> log_probs;

  double log_prob(std::string_view tok) const {
    const auto id = vocab.id_of(tok);
    if (!id || static_cast<std::size_t>(*id) >= log_probs.size()) {
      throw ContractError("log_prob: token not in vocabulary");
    }
    return log_probs[static_cast<std::size_t>(*id)];
  }
};

// Ordered by word so every trainer walks the corpus in a platform-independent
// order; counts are always >= 1.
using WordFrequencyTable = std::map<std::string, std::uint64_t>;

// Counts NFKC-normalized, whitespace-split forms.
inline WordFrequencyTable build_word_table(std::span<const Sentence> sentences) {
  WordFrequencyTable table;
  for (const Sentence& sentence : sentences) {
    for (const Token& token : sentence.tokens) {
      for (const std::string& word : split_whitespace(normalize(token.form))) {
        ++table[word];
      }
    }
  }
  return table;
}

// Attaches the boundary marker to every word. Used by the unigram pipeline,
// whose trainer sees markers as ordinary characters of its input words.
inline WordFrequencyTable mark_words(const WordFrequencyTable& table,
                                     MarkerStyle style) {
  WordFrequencyTable marked;
  for (const auto& [word, count] : table) {
    std::string w = style == MarkerStyle::kWordInitialUnderscore
                        ? std::string(kWordInitialMarker) + word
                        : word + std::string(kEndOfWordMarker);
    marked[std::move(w)] += count;
  }
  return marked;
}

namespace detail {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

// Shortest decimal that round-trips the double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw Error("double formatting failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const char* what) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ModelIoError(ModelIoError::Kind::kFormat,
                       std::string("bad number in ") + what + ": \"" + std::string(s) + "\"");
  }
  return v;
}

inline bool is_single_codepoint(std::string_view s) {
  return !s.empty() && codepoint_count(s) == 1;
}

// Base symbols of a merge system: single code points plus the multi-byte
// end-of-word marker, which is atomic even though it spells four characters.
inline bool is_base_symbol(std::string_view s) {
  return is_single_codepoint(s) || s == kEndOfWordMarker;
}

}  // namespace detail

inline constexpr std::string_view kModelMagic = "toklab-model";
inline constexpr std::string_view kModelFormatVersion = "1";

// Text format: a header line, one vocabulary entry per line
// (id \t token \t logprob-or-dash), a #merges section for BPE/OBPE, and a
// trailing #checksum line over everything above it.
inline void save_model(const TokenizerModel& model, std::ostream& out) {
  const bool unigram = model.paradigm == Paradigm::kUnigram;
  if (unigram && model.log_probs.size() != model.vocab.size()) {
    throw ContractError("save_model: log_probs/vocabulary size mismatch");
  }
  std::ostringstream payload;
  payload << kModelMagic << '\t' << kModelFormatVersion << '\t'
          << paradigm_name(model.paradigm) << '\t' << model.vocab.size() << '\t'
          << marker_style_name(model.marker_style) << '\t' << model.unk_token
          << '\n';
  for (std::size_t id = 0; id < model.vocab.size(); ++id) {
    const std::string& tok = model.vocab.token(static_cast<int>(id));
    if (tok.find('\t') != std::string::npos || tok.find('\n') != std::string::npos) {
      throw ContractError("save_model: token contains tab or newline");
    }
    payload << id << '\t' << tok << '\t';
    if (unigram) {
      payload << detail::format_double(model.log_probs[id]);
    } else {
      payload << '-';
    }
    payload << '\n';
  }
  if (!unigram) {
    payload << "#merges\t" << model.merges.size() << '\n';
    for (const auto& [left, right] : model.merges) {
      payload << left << '\t' << right << '\n';
    }
  }
  const std::string body = payload.str();
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016llx",
                static_cast<unsigned long long>(detail::fnv1a64(body)));
  out << body << "#checksum\t" << checksum << '\n';
  if (!out) throw Error("save_model: write failed");
}

namespace detail {

inline void check_model_invariants(const TokenizerModel& model) {
  using Kind = ModelIoError::Kind;
  if (model.paradigm == Paradigm::kUnigram) {
    double sum = 0.0;
    for (std::size_t id = 0; id < model.vocab.size(); ++id) {
      const double lp = model.log_probs[id];
      if (lp > 0.0 || std::isnan(lp)) {
        throw ModelIoError(Kind::kInvariant,
                           "positive log-probability for token \"" +
                               model.vocab.token(static_cast<int>(id)) + "\"");
      }
      sum += std::exp(lp);
    }
    // The unk entry carries a penalty score outside the distribution; its
    // exp is ~2e-9 and disappears inside the tolerance.
    if (std::abs(sum - 1.0) > 1e-6) {
      throw ModelIoError(Kind::kInvariant,
                         "log-probabilities do not sum to one (exp-sum " +
                             format_double(sum) + ")");
    }
  } else {
    // Replaying the merges from base symbols must generate exactly the
    // non-base entries of the vocabulary.
    std::set<std::string> known;
    std::set<std::string> products;
    for (const std::string& tok : model.vocab.tokens()) {
      if (tok == model.unk_token) continue;
      if (is_base_symbol(tok)) known.insert(tok);
    }
    for (const auto& [left, right] : model.merges) {
      if (!known.count(left) || !known.count(right)) {
        throw ModelIoError(Kind::kInvariant,
                           "merge (" + left + ", " + right +
                               ") references an unknown symbol");
      }
      std::string product = left + right;
      if (!model.vocab.contains(product)) {
        throw ModelIoError(Kind::kInvariant,
                           "merge product \"" + product + "\" missing from vocabulary");
      }
      known.insert(product);
      products.insert(std::move(product));
    }
    for (const std::string& tok : model.vocab.tokens()) {
      if (tok == model.unk_token || is_base_symbol(tok)) continue;
      if (!products.count(tok)) {
        throw ModelIoError(Kind::kInvariant,
                           "vocabulary entry \"" + tok +
                               "\" is not generated by the merge list");
      }
    }
  }
}

}  // namespace detail

inline TokenizerModel load_model(std::istream& in) {
  using Kind = ModelIoError::Kind;
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  // Separate the trailing checksum line from the payload.
  const std::string_view checksum_tag = "#checksum\t";
  const std::size_t tag_pos = data.rfind(std::string(checksum_tag));
  if (tag_pos == std::string::npos || (tag_pos != 0 && data[tag_pos - 1] != '\n')) {
    throw ModelIoError(Kind::kChecksum, "missing checksum line (truncated model file?)");
  }
  std::string_view checksum_line = std::string_view(data).substr(tag_pos);
  if (!checksum_line.ends_with('\n')) {
    throw ModelIoError(Kind::kChecksum, "unterminated checksum line");
  }
  checksum_line.remove_suffix(1);
  const std::string_view body = std::string_view(data).substr(0, tag_pos);
  const std::string_view stored = checksum_line.substr(checksum_tag.size());
  char expected[32];
  std::snprintf(expected, sizeof(expected), "%016llx",
                static_cast<unsigned long long>(detail::fnv1a64(body)));
  if (stored != expected) {
    throw ModelIoError(Kind::kChecksum, "checksum mismatch (corrupted model file)");
  }

  // Payload lines.
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < body.size()) {
    std::size_t end = body.find('\n', start);
    if (end == std::string::npos) {
      throw ModelIoError(Kind::kFormat, "unterminated line in model file");
    }
    lines.push_back(body.substr(start, end - start));
    start = end + 1;
  }
  if (lines.empty()) throw ModelIoError(Kind::kFormat, "empty model file");

  const auto header = detail::split_tabs(lines[0]);
  if (header.size() != 6 || header[0] != kModelMagic) {
    throw ModelIoError(Kind::kVersion, "not a toklab model file");
  }
  if (header[1] != kModelFormatVersion) {
    throw ModelIoError(Kind::kVersion, "unsupported model format version \"" +
                                           std::string(header[1]) + "\"");
  }

  TokenizerModel model;
  try {
    model.paradigm = parse_paradigm(header[2]);
    model.marker_style = parse_marker_style(header[4]);
  } catch (const UsageError& e) {
    throw ModelIoError(Kind::kFormat, e.what());
  }
  const std::uint64_t declared_size =
      static_cast<std::uint64_t>(detail::parse_double(header[3], "vocab size"));
  model.unk_token = std::string(header[5]);

  const bool unigram = model.paradigm == Paradigm::kUnigram;
  std::size_t i = 1;
  for (; i < lines.size() && !lines[i].starts_with('#'); ++i) {
    const auto cols = detail::split_tabs(lines[i]);
    if (cols.size() != 3) {
      throw ModelIoError(Kind::kFormat, "vocabulary line needs 3 columns");
    }
    const std::uint64_t id =
        static_cast<std::uint64_t>(detail::parse_double(cols[0], "vocab id"));
    if (id != model.vocab.size()) {
      throw ModelIoError(Kind::kFormat, "vocabulary ids must be dense and ascending");
    }
    if (cols[1].empty()) {
      throw ModelIoError(Kind::kFormat, "empty token string");
    }
    if (model.vocab.contains(cols[1])) {
      throw ModelIoError(Kind::kInvariant,
                         "duplicate token \"" + std::string(cols[1]) + "\"");
    }
    model.vocab.add(std::string(cols[1]));
    if (unigram) {
      if (cols[2] == "-") {
        throw ModelIoError(Kind::kFormat, "unigram entry lacks a log-probability");
      }
      model.log_probs.push_back(detail::parse_double(cols[2], "log-probability"));
    } else if (cols[2] != "-") {
      throw ModelIoError(Kind::kFormat,
                         "unexpected log-probability on a merge-based model entry");
    }
  }
  if (model.vocab.size() != declared_size) {
    throw ModelIoError(Kind::kFormat, "vocabulary size does not match header");
  }

  if (!unigram) {
    if (i >= lines.size() || !lines[i].starts_with("#merges\t")) {
      throw ModelIoError(Kind::kFormat, "missing #merges section");
    }
    const std::uint64_t n_merges = static_cast<std::uint64_t>(
        detail::parse_double(detail::split_tabs(lines[i])[1], "merge count"));
    ++i;
    for (std::uint64_t k = 0; k < n_merges; ++k, ++i) {
      if (i >= lines.size()) {
        throw ModelIoError(Kind::kFormat, "merge list shorter than declared");
      }
      const auto cols = detail::split_tabs(lines[i]);
      if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
        throw ModelIoError(Kind::kFormat, "merge line needs 2 non-empty columns");
      }
      model.merges.emplace_back(std::string(cols[0]), std::string(cols[1]));
    }
  }
  if (i != lines.size()) {
    throw ModelIoError(Kind::kFormat, "trailing garbage in model file");
  }

  detail::check_model_invariants(model);
  return model;
}

inline void save_model_file(const TokenizerModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open model file for writing: " + path);
  save_model(model, out);
}

inline TokenizerModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path);
  return load_model(in);
}

}  // namespace toklab
