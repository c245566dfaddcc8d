#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toklab/conllu.hpp"
#include "toklab/errors.hpp"
#include "toklab/text.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

// Label for subword positions that carry no POS tag.
inline constexpr std::string_view kPadLabel = "<pad>";

struct StrippedSubword {
  std::string text;       // subword with the boundary marker removed
  bool word_boundary;     // true if this subword carried the marker
};

// Removes the word-initial or end-of-word marker from each subword and flags
// where it was. A bare marker token strips to the empty string.
inline std::vector<StrippedSubword> strip_markers(std::span<const std::string> subwords,
                                                  MarkerStyle style) {
  std::vector<StrippedSubword> out;
  out.reserve(subwords.size());
  for (const std::string& sub : subwords) {
    StrippedSubword s{sub, false};
    if (style == MarkerStyle::kWordInitialUnderscore) {
      if (std::string_view(sub).starts_with(kWordInitialMarker)) {
        s.text = sub.substr(kWordInitialMarker.size());
        s.word_boundary = true;
      }
    } else {
      if (std::string_view(sub).ends_with(kEndOfWordMarker)) {
        s.text = sub.substr(0, sub.size() - kEndOfWordMarker.size());
        s.word_boundary = true;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct TokenRun {
  std::size_t token_index = 0;     // index into the gold token list
  std::size_t first_subword = 0;   // index of the run's first subword
  std::size_t subword_count = 0;
  std::size_t char_begin = 0;      // code point span in the concatenated
  std::size_t char_end = 0;        // whitespace-free gold character stream
};

struct Alignment {
  std::vector<TokenRun> runs;              // one per gold token, in order
  std::vector<StrippedSubword> subwords;   // full stripped subword list
};

// Walks gold tokens and subwords in lockstep, matching characters greedily.
// Both sides are NFKC-normalized and whitespace-free; markers carry no
// characters. Every subword must land inside exactly one gold token, else an
// alignment error reports the two character streams.
inline Alignment greedy_align(std::span<const Token> gold,
                              std::span<const std::string> subwords,
                              MarkerStyle style) {
  Alignment alignment;
  alignment.subwords = strip_markers(subwords, style);
  for (StrippedSubword& s : alignment.subwords) s.text = normalize(s.text);

  auto subword_stream = [&](std::size_t first, std::size_t past) {
    std::string joined;
    for (std::size_t k = first; k < past && k < alignment.subwords.size(); ++k) {
      if (!joined.empty()) joined += '|';
      joined += alignment.subwords[k].text;
    }
    return joined;
  };

  std::size_t si = 0;
  std::size_t char_cursor = 0;
  for (std::size_t ti = 0; ti < gold.size(); ++ti) {
    const std::string form = remove_whitespace(normalize(gold[ti].form));
    const std::size_t first = si;
    std::string covered;
    while (covered.size() < form.size()) {
      if (si >= alignment.subwords.size()) {
        throw AlignError("subwords exhausted before covering gold token", ti, false,
                         form, subword_stream(first, si));
      }
      const std::string& piece = alignment.subwords[si].text;
      if (piece.empty()) {
        ++si;  // a bare marker belongs to the token being covered
        continue;
      }
      const std::string extended = covered + piece;
      if (std::string_view(form).starts_with(extended)) {
        covered = extended;
        ++si;
      } else if (std::string_view(extended).starts_with(form)) {
        throw AlignError("subword spans a gold token boundary", ti, true, form,
                         subword_stream(first, si + 1));
      } else {
        throw AlignError("subword characters diverge from gold token", ti, false,
                         form, subword_stream(first, si + 1));
      }
    }
    // End-of-word markers close the word they follow.
    if (style == MarkerStyle::kEndOfWordSuffix) {
      while (si < alignment.subwords.size() && alignment.subwords[si].text.empty() &&
             alignment.subwords[si].word_boundary) {
        ++si;
      }
    }
    if (si == first) {
      // A gold token must own at least one subword even if the form
      // normalizes to nothing; nothing in the stream maps here.
      throw AlignError("no subwords available for empty gold token", ti, false, form,
                       subword_stream(first, si + 1));
    }
    const std::size_t form_cps = codepoint_count(form);
    alignment.runs.push_back(
        TokenRun{ti, first, si - first, char_cursor, char_cursor + form_cps});
    char_cursor += form_cps;
  }
  if (si != alignment.subwords.size()) {
    throw AlignError("subwords extend past the last gold token", gold.size(), false,
                     "", subword_stream(si, alignment.subwords.size()));
  }
  return alignment;
}

struct ProjectedSequence {
  std::vector<std::string> subwords;       // marker-stripped subword text
  std::vector<std::string> labels;         // POS tag or kPadLabel
  std::vector<std::size_t> run_position;   // 0 = first subword of its token
  std::vector<bool> word_boundary;         // marker flag per subword
};

// First-subword projection: within each gold token's run exactly the first
// subword carries the tag, the rest are padding.
inline ProjectedSequence project_first_subword(const Alignment& alignment,
                                               std::span<const Token> gold) {
  if (alignment.runs.size() != gold.size()) {
    throw ContractError("project_first_subword: alignment does not match gold tokens");
  }
  ProjectedSequence seq;
  const std::size_t n = alignment.subwords.size();
  seq.subwords.reserve(n);
  for (const StrippedSubword& s : alignment.subwords) {
    seq.subwords.push_back(s.text);
    seq.word_boundary.push_back(s.word_boundary);
  }
  seq.labels.assign(n, std::string(kPadLabel));
  seq.run_position.assign(n, 0);
  for (const TokenRun& run : alignment.runs) {
    for (std::size_t k = 0; k < run.subword_count; ++k) {
      seq.run_position[run.first_subword + k] = k;
    }
    seq.labels[run.first_subword] = gold[run.token_index].upos;
  }
  return seq;
}

// Reads one prediction per gold token back off the first subword of its run.
inline std::vector<std::string> recover_token_predictions(
    const Alignment& alignment, std::span<const std::string> subword_predictions) {
  if (subword_predictions.size() != alignment.subwords.size()) {
    throw ContractError(
        "recover_token_predictions: prediction/subword length mismatch");
  }
  std::vector<std::string> out;
  out.reserve(alignment.runs.size());
  for (const TokenRun& run : alignment.runs) {
    out.push_back(subword_predictions[run.first_subword]);
  }
  return out;
}

}  // namespace toklab
