#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "toklab/align.hpp"
#include "toklab/errors.hpp"
#include "toklab/rng.hpp"
#include "toklab/text.hpp"

namespace toklab {

// Feature strings for one subword position: the subword itself, its
// neighbors, the word-boundary flag, short prefixes/suffixes (code points),
// and where the position sits inside its gold token's run.
inline std::vector<std::string> extract_features(const ProjectedSequence& seq,
                                                 std::size_t pos) {
  if (pos >= seq.subwords.size()) {
    throw ContractError("extract_features: position out of range");
  }
  std::vector<std::string> feats;
  feats.reserve(14);
  const std::string& cur = seq.subwords[pos];
  feats.push_back("bias");
  feats.push_back("w=" + cur);
  feats.push_back("pw=" + (pos > 0 ? seq.subwords[pos - 1] : std::string("<s>")));
  feats.push_back("nw=" + (pos + 1 < seq.subwords.size() ? seq.subwords[pos + 1]
                                                         : std::string("</s>")));
  const bool word_start = seq.run_position[pos] == 0;
  feats.push_back(word_start ? "ws=1" : "ws=0");
  feats.push_back("rp=" + std::string(seq.run_position[pos] == 0   ? "first"
                                      : seq.run_position[pos] == 1 ? "second"
                                                                   : "later"));
  const std::vector<std::string> cps = codepoints(cur);
  std::string prefix;
  for (std::size_t k = 0; k < 3 && k < cps.size(); ++k) {
    prefix += cps[k];
    feats.push_back("p" + std::to_string(k + 1) + "=" + prefix);
  }
  std::string suffix;
  for (std::size_t k = 0; k < 3 && k < cps.size(); ++k) {
    suffix = cps[cps.size() - 1 - k] + suffix;
    feats.push_back("s" + std::to_string(k + 1) + "=" + suffix);
  }
  return feats;
}

struct TaggerModel {
  std::vector<std::string> tagset;  // sorted; prediction ties keep the first
  // feature -> per-tag averaged weights, indexed like tagset
  std::unordered_map<std::string, std::vector<double>> weights;
  std::size_t epochs_trained = 0;

  int predict(const std::vector<std::string>& feats) const {
    if (tagset.empty()) throw ContractError("TaggerModel: empty tagset");
    std::vector<double> scores(tagset.size(), 0.0);
    for (const std::string& f : feats) {
      auto it = weights.find(f);
      if (it == weights.end()) continue;
      for (std::size_t t = 0; t < scores.size(); ++t) scores[t] += it->second[t];
    }
    int best = 0;
    for (std::size_t t = 1; t < scores.size(); ++t) {
      if (scores[t] > scores[best]) best = static_cast<int>(t);
    }
    return best;
  }
};

namespace detail {

struct TaggerPhase {
  std::span<const ProjectedSequence> sequences;
  std::size_t epochs = 0;
};

// Averaged perceptron over non-PAD positions, run phase by phase over one
// averaging horizon. Instance order is reshuffled each epoch from the seed;
// argmax ties go to the first tag in the sorted tagset, so training is
// bit-reproducible.
inline TaggerModel train_tagger_phases(std::span<const TaggerPhase> phases,
                                       std::uint64_t seed) {
  std::size_t total_epochs = 0;
  std::set<std::string> tags;
  for (const TaggerPhase& phase : phases) {
    if (phase.sequences.empty()) {
      throw ContractError("train_tagger: no training sequences");
    }
    if (phase.epochs == 0) throw ContractError("train_tagger: zero epochs");
    total_epochs += phase.epochs;
    for (const ProjectedSequence& seq : phase.sequences) {
      if (seq.labels.size() != seq.subwords.size() ||
          seq.run_position.size() != seq.subwords.size()) {
        throw ContractError("train_tagger: ragged projected sequence");
      }
      for (const std::string& label : seq.labels) {
        if (label != kPadLabel) tags.insert(label);
      }
    }
  }
  if (tags.empty()) throw ContractError("train_tagger: no labeled positions");

  TaggerModel model;
  model.tagset.assign(tags.begin(), tags.end());
  std::map<std::string, int> tag_ids;
  for (std::size_t t = 0; t < model.tagset.size(); ++t) {
    tag_ids[model.tagset[t]] = static_cast<int>(t);
  }

  struct Instance {
    std::vector<std::string> feats;
    int tag = 0;
  };
  // PAD rows never become instances, which is what keeps them out of every
  // update.
  std::vector<std::vector<Instance>> phase_instances;
  for (const TaggerPhase& phase : phases) {
    std::vector<Instance> instances;
    for (const ProjectedSequence& seq : phase.sequences) {
      for (std::size_t pos = 0; pos < seq.subwords.size(); ++pos) {
        if (seq.labels[pos] == kPadLabel) continue;
        instances.push_back({extract_features(seq, pos), tag_ids[seq.labels[pos]]});
      }
    }
    phase_instances.push_back(std::move(instances));
  }

  const std::size_t n_tags = model.tagset.size();
  std::unordered_map<std::string, std::vector<double>> w;
  std::unordered_map<std::string, std::vector<double>> totals;
  std::unordered_map<std::string, std::vector<std::uint64_t>> stamps;
  std::uint64_t step = 0;

  auto bump = [&](const std::string& f, int tag, double delta) {
    auto& wf = w[f];
    if (wf.empty()) {
      wf.assign(n_tags, 0.0);
      totals[f].assign(n_tags, 0.0);
      stamps[f].assign(n_tags, 0);
    }
    auto& tf = totals[f];
    auto& sf = stamps[f];
    const std::size_t t = static_cast<std::size_t>(tag);
    tf[t] += static_cast<double>(step - sf[t]) * wf[t];
    sf[t] = step;
    wf[t] += delta;
  };

  auto predict_raw = [&](const std::vector<std::string>& feats) {
    std::vector<double> scores(n_tags, 0.0);
    for (const std::string& f : feats) {
      auto it = w.find(f);
      if (it == w.end()) continue;
      for (std::size_t t = 0; t < n_tags; ++t) scores[t] += it->second[t];
    }
    int best = 0;
    for (std::size_t t = 1; t < n_tags; ++t) {
      if (scores[t] > scores[best]) best = static_cast<int>(t);
    }
    return best;
  };

  std::mt19937_64 rng(seed);
  for (std::size_t pi = 0; pi < phases.size(); ++pi) {
    std::vector<Instance>& instances = phase_instances[pi];
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < phases[pi].epochs; ++epoch) {
      shuffle_deterministic(order, rng);
      for (std::size_t idx : order) {
        const Instance& inst = instances[idx];
        ++step;
        const int guess = predict_raw(inst.feats);
        if (guess != inst.tag) {
          for (const std::string& f : inst.feats) {
            bump(f, inst.tag, +1.0);
            bump(f, guess, -1.0);
          }
        }
      }
    }
  }

  // Finish the running averages.
  for (auto& [f, wf] : w) {
    auto& tf = totals[f];
    auto& sf = stamps[f];
    std::vector<double> averaged(n_tags, 0.0);
    for (std::size_t t = 0; t < n_tags; ++t) {
      tf[t] += static_cast<double>(step - sf[t]) * wf[t];
      averaged[t] = step > 0 ? tf[t] / static_cast<double>(step) : 0.0;
    }
    model.weights.emplace(f, std::move(averaged));
  }
  model.epochs_trained = total_epochs;
  return model;
}

}  // namespace detail

inline TaggerModel train_tagger(std::span<const ProjectedSequence> sequences,
                                std::size_t epochs, std::uint64_t seed) {
  const detail::TaggerPhase phase{sequences, epochs};
  return detail::train_tagger_phases(std::span(&phase, 1), seed);
}

// Warm-starts on another language's sequences before the main data; both
// stages share one averaging horizon.
inline TaggerModel train_tagger_pretrained(
    std::span<const ProjectedSequence> pretrain_sequences,
    std::span<const ProjectedSequence> sequences, std::size_t pretrain_epochs,
    std::size_t epochs, std::uint64_t seed) {
  const detail::TaggerPhase phases[] = {{pretrain_sequences, pretrain_epochs},
                                        {sequences, epochs}};
  return detail::train_tagger_phases(phases, seed);
}

// Predicts one tag per subword; positions after the first of each run emit
// the PAD label.
inline std::vector<std::string> tag(const TaggerModel& model,
                                    const ProjectedSequence& seq) {
  std::vector<std::string> out;
  out.reserve(seq.subwords.size());
  for (std::size_t pos = 0; pos < seq.subwords.size(); ++pos) {
    if (seq.run_position[pos] != 0) {
      out.emplace_back(kPadLabel);
      continue;
    }
    out.push_back(model.tagset[static_cast<std::size_t>(
        model.predict(extract_features(seq, pos)))]);
  }
  return out;
}

}  // namespace toklab
