#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "toklab/bpe.hpp"
#include "toklab/unigram.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

// Paradigm dispatch: merge replay for BPE/OBPE, Viterbi for unigram.
inline std::vector<std::string> encode(const TokenizerModel& model,
                                       std::string_view text) {
  return model.paradigm == Paradigm::kUnigram ? encode_viterbi(model, text)
                                              : encode_bpe(model, text);
}

}  // namespace toklab
