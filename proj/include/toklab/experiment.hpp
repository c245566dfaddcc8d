#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "toklab/align.hpp"
#include "toklab/bpe.hpp"
#include "toklab/conllu.hpp"
#include "toklab/errors.hpp"
#include "toklab/metrics.hpp"
#include "toklab/obpe.hpp"
#include "toklab/tagger.hpp"
#include "toklab/tokenize.hpp"
#include "toklab/unigram.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

// Everything a run needs, and nothing machine-specific: paths are recorded as
// given, the output directory is deliberately not part of the config, so a
// manifest replayed elsewhere reproduces the same bytes.
struct ExperimentConfig {
  std::string lang;
  Paradigm paradigm = Paradigm::kBpe;
  std::string corpus;      // single file that gets split; empty in explicit mode
  std::string src_corpus;  // transfer source, overlap runs only
  std::string train_file;  // explicit mode: pre-split files
  std::string dev_file;
  std::string test_file;
  std::string split = "auto";  // "auto" or colon weights like "6:2:2"
  std::uint64_t split_seed = 0;
  std::size_t low_resource_threshold = kLowResourceThreshold;

  std::size_t vocab_size = 400;
  std::optional<MarkerStyle> marker;  // defaults from the paradigm
  std::string unk_token = std::string(kDefaultUnkToken);

  double alpha = 0.5;                          // overlap runs
  MeanExponent p = MeanExponent::neg_infinity();

  double seed_size_factor = 20.0;  // unigram runs
  std::size_t max_seed_token_len = 16;
  double prune_fraction = 0.25;
  std::size_t em_subiters = 2;

  std::size_t tagger_epochs = 5;
  std::uint64_t tagger_seed = 1;
  bool pretrain_source_tagger = false;  // warm-start on the transfer source
  std::size_t pretrain_epochs = 2;

  bool skip_misaligned = false;
  double sample_temperature = 0.0;  // > 0 samples train-side segmentations
  std::uint64_t sample_seed = 0;

  MarkerStyle marker_style() const {
    return marker ? *marker : default_marker_style(paradigm);
  }

  void validate() const {
    if (lang.empty()) throw UsageError("experiment: language code is required");
    const bool explicit_mode = !train_file.empty() || !test_file.empty();
    if (explicit_mode) {
      if (train_file.empty() || test_file.empty()) {
        throw UsageError("experiment: explicit mode needs both train and test files");
      }
      if (!corpus.empty()) {
        throw UsageError("experiment: give either one corpus or explicit split files");
      }
    } else if (corpus.empty()) {
      throw UsageError("experiment: no corpus given");
    }
    if (paradigm == Paradigm::kObpe && src_corpus.empty()) {
      throw UsageError("experiment: overlap runs need a source corpus");
    }
    if (paradigm != Paradigm::kObpe && !src_corpus.empty()) {
      throw UsageError("experiment: source corpus only applies to overlap runs");
    }
    if (pretrain_source_tagger && paradigm != Paradigm::kObpe) {
      throw UsageError("experiment: tagger pretraining needs a shared vocabulary, "
                       "use the overlap paradigm");
    }
    if (sample_temperature > 0.0 && paradigm != Paradigm::kUnigram) {
      throw UsageError("experiment: sampled segmentation is a unigram feature");
    }
    if (sample_temperature < 0.0) {
      throw UsageError("experiment: sample temperature must be >= 0");
    }
    if (tagger_epochs == 0) throw UsageError("experiment: tagger epochs must be > 0");
    if (pretrain_source_tagger && pretrain_epochs == 0) {
      throw UsageError("experiment: pretrain epochs must be > 0");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw UsageError("experiment: alpha must lie in [0, 1]");
    }
  }
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t x = a * 0x9E3779B97F4A7C15ull + b;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x += c;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::uint64_t parse_u64_field(std::string_view s, const std::string& what,
                                     std::size_t line) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError(what + ": expected unsigned integer, got \"" + std::string(s) + "\"",
                     line);
  }
  return v;
}

inline double parse_double_field(std::string_view s, const std::string& what,
                                 std::size_t line) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError(what + ": expected number, got \"" + std::string(s) + "\"", line);
  }
  return v;
}

inline bool parse_bool_field(std::string_view s, const std::string& what,
                             std::size_t line) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw ParseError(what + ": expected 0 or 1, got \"" + std::string(s) + "\"", line);
}

}  // namespace detail

inline constexpr std::string_view kManifestMagic = "toklab-manifest";
inline constexpr std::string_view kManifestVersion = "1";

// One key per line, keys sorted, every key always present. The output
// directory never appears here.
inline void write_manifest(const ExperimentConfig& config, std::ostream& out) {
  std::map<std::string, std::string> kv;
  kv["alpha"] = detail::format_double(config.alpha);
  kv["corpus"] = config.corpus;
  kv["dev_file"] = config.dev_file;
  kv["em_subiters"] = std::to_string(config.em_subiters);
  kv["lang"] = config.lang;
  kv["low_resource_threshold"] = std::to_string(config.low_resource_threshold);
  kv["marker"] = std::string(marker_style_name(config.marker_style()));
  kv["max_seed_token_len"] = std::to_string(config.max_seed_token_len);
  kv["p"] = config.p.to_string();
  kv["paradigm"] = std::string(paradigm_name(config.paradigm));
  kv["pretrain_epochs"] = std::to_string(config.pretrain_epochs);
  kv["pretrain_source_tagger"] = config.pretrain_source_tagger ? "1" : "0";
  kv["prune_fraction"] = detail::format_double(config.prune_fraction);
  kv["sample_seed"] = std::to_string(config.sample_seed);
  kv["sample_temperature"] = detail::format_double(config.sample_temperature);
  kv["seed_size_factor"] = detail::format_double(config.seed_size_factor);
  kv["skip_misaligned"] = config.skip_misaligned ? "1" : "0";
  kv["split"] = config.split;
  kv["split_seed"] = std::to_string(config.split_seed);
  kv["src_corpus"] = config.src_corpus;
  kv["tagger_epochs"] = std::to_string(config.tagger_epochs);
  kv["tagger_seed"] = std::to_string(config.tagger_seed);
  kv["test_file"] = config.test_file;
  kv["train_file"] = config.train_file;
  kv["unk"] = config.unk_token;
  kv["vocab_size"] = std::to_string(config.vocab_size);

  out << kManifestMagic << '\t' << kManifestVersion << '\n';
  for (const auto& [k, v] : kv) out << k << '\t' << v << '\n';
}

inline ExperimentConfig parse_manifest(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("manifest: missing tab", line_no);
    const std::string key = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    if (!saw_header) {
      if (key != kManifestMagic || value != kManifestVersion) {
        throw ParseError("manifest: bad header", line_no);
      }
      saw_header = true;
      continue;
    }
    if (!kv.emplace(key, std::make_pair(value, line_no)).second) {
      throw ParseError("manifest: duplicate key \"" + key + "\"", line_no);
    }
  }
  if (!saw_header) throw ParseError("manifest: empty file", line_no);

  auto req = [&](const std::string& key) -> std::pair<std::string, std::size_t> {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw ParseError("manifest: missing key \"" + key + "\"", line_no);
    }
    return it->second;
  };
  auto str = [&](const char* key) { return req(key).first; };
  auto u64 = [&](const char* key) {
    auto [v, ln] = req(key);
    return detail::parse_u64_field(v, std::string("manifest key ") + key, ln);
  };
  auto dbl = [&](const char* key) {
    auto [v, ln] = req(key);
    return detail::parse_double_field(v, std::string("manifest key ") + key, ln);
  };
  auto flag = [&](const char* key) {
    auto [v, ln] = req(key);
    return detail::parse_bool_field(v, std::string("manifest key ") + key, ln);
  };

  ExperimentConfig config;
  config.lang = str("lang");
  config.paradigm = parse_paradigm(str("paradigm"));
  config.corpus = str("corpus");
  config.src_corpus = str("src_corpus");
  config.train_file = str("train_file");
  config.dev_file = str("dev_file");
  config.test_file = str("test_file");
  config.split = str("split");
  config.split_seed = u64("split_seed");
  config.low_resource_threshold = static_cast<std::size_t>(u64("low_resource_threshold"));
  config.vocab_size = static_cast<std::size_t>(u64("vocab_size"));
  config.marker = parse_marker_style(str("marker"));
  config.unk_token = str("unk");
  config.alpha = dbl("alpha");
  config.p = MeanExponent::parse(str("p"));
  config.seed_size_factor = dbl("seed_size_factor");
  config.max_seed_token_len = static_cast<std::size_t>(u64("max_seed_token_len"));
  config.prune_fraction = dbl("prune_fraction");
  config.em_subiters = static_cast<std::size_t>(u64("em_subiters"));
  config.tagger_epochs = static_cast<std::size_t>(u64("tagger_epochs"));
  config.tagger_seed = u64("tagger_seed");
  config.pretrain_source_tagger = flag("pretrain_source_tagger");
  config.pretrain_epochs = static_cast<std::size_t>(u64("pretrain_epochs"));
  config.skip_misaligned = flag("skip_misaligned");
  config.sample_temperature = dbl("sample_temperature");
  config.sample_seed = u64("sample_seed");
  return config;
}

inline ExperimentConfig load_manifest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open manifest: " + path);
  return parse_manifest(in);
}

// Colon-separated positive integer weights, e.g. "6:2:2".
inline SplitSpec parse_split_weights(std::string_view text) {
  std::int64_t w[3] = {0, 0, 0};
  std::size_t begin = 0;
  for (int k = 0; k < 3; ++k) {
    const std::size_t end =
        k < 2 ? text.find(':', begin) : text.size();
    if (end == std::string_view::npos) {
      throw UsageError("bad split \"" + std::string(text) + "\", want like 6:2:2");
    }
    const std::string_view part = text.substr(begin, end - begin);
    auto res = std::from_chars(part.data(), part.data() + part.size(), w[k]);
    if (res.ec != std::errc{} || res.ptr != part.data() + part.size() || w[k] <= 0) {
      throw UsageError("bad split \"" + std::string(text) + "\", want like 6:2:2");
    }
    begin = end + 1;
  }
  SplitSpec spec;
  spec.train_weight = w[0];
  spec.dev_weight = w[1];
  spec.test_weight = w[2];
  return spec;
}

struct ExperimentResult {
  MetricReport metrics;
  double fertility_train = 0.0;
  double fertility_test = 0.0;
  double pos_entropy_train = 0.0;
  std::size_t train_sentences = 0;
  std::size_t dev_sentences = 0;
  std::size_t test_sentences = 0;
  std::size_t skipped_train = 0;  // sentences dropped by skip_misaligned
  std::size_t skipped_test = 0;
  std::size_t source_sentences = 0;   // pretraining input, overlap runs
  std::size_t skipped_source = 0;
  TokenizerModel model;
  UnigramTrainReport unigram_report;  // zeros for merge-based paradigms
};

namespace detail {

struct EncodedSentence {
  Alignment alignment;
  ProjectedSequence projected;
};

// Encodes token by token so subword runs can be mapped back to gold tokens,
// then aligns and projects. Sampling only ever applies to training data.
inline std::optional<EncodedSentence> encode_and_project(
    const TokenizerModel& model, const Sentence& sentence,
    const ExperimentConfig& config, std::size_t sentence_index, bool allow_sampling,
    bool skip_misaligned, std::size_t* skipped) {
  std::vector<std::string> subwords;
  const bool sampled = allow_sampling && config.sample_temperature > 0.0 &&
                       model.paradigm == Paradigm::kUnigram;
  for (std::size_t ti = 0; ti < sentence.tokens.size(); ++ti) {
    std::vector<std::string> pieces =
        sampled ? encode_sampled(model, sentence.tokens[ti].form,
                                 config.sample_temperature,
                                 mix_seed(config.sample_seed, sentence_index, ti))
                : encode(model, sentence.tokens[ti].form);
    for (std::string& p : pieces) subwords.push_back(std::move(p));
  }
  EncodedSentence enc;
  try {
    enc.alignment = greedy_align(sentence.tokens, subwords, model.marker_style);
  } catch (const AlignError&) {
    if (skip_misaligned) {
      ++*skipped;
      return std::nullopt;
    }
    throw;
  }
  enc.projected = project_first_subword(enc.alignment, sentence.tokens);
  return enc;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << content;
  if (!out) throw UsageError("failed writing " + path);
}

}  // namespace detail

// Full pipeline: load, split, train the tokenizer, align and project, train
// the tagger, evaluate on the test split. With a non-empty out_dir the run
// also writes manifest.txt, model.toklab, metrics.tsv, per_tag.tsv,
// confusion.tsv and log.txt; outputs carry no timestamps or absolute paths,
// so a repeated run produces identical bytes.
inline ExperimentResult run_experiment(const ExperimentConfig& config,
                                       const std::string& out_dir = "") {
  config.validate();
  std::ostringstream log;

  CorpusSplit split;
  const bool explicit_mode = !config.train_file.empty();
  if (explicit_mode) {
    split.train = load_conllu_file(config.train_file);
    if (!config.dev_file.empty()) split.dev = load_conllu_file(config.dev_file);
    split.test = load_conllu_file(config.test_file);
    log << "load: train=" << split.train.size() << " dev=" << split.dev.size()
        << " test=" << split.test.size() << " (explicit files)\n";
  } else {
    const std::vector<Sentence> sentences = load_conllu_file(config.corpus);
    SplitSpec spec = config.split == "auto"
                         ? select_split_spec(sentences.size(),
                                             config.low_resource_threshold)
                         : parse_split_weights(config.split);
    spec.seed = config.split_seed;
    split = split_corpus(sentences, spec);
    log << "load: sentences=" << sentences.size() << "\n";
    log << "split: train=" << split.train.size() << " dev=" << split.dev.size()
        << " test=" << split.test.size() << " weights=" << spec.train_weight << ':'
        << spec.dev_weight << ':' << spec.test_weight << " seed=" << spec.seed
        << "\n";
  }
  if (split.train.empty()) throw TrainError("experiment: empty training split");
  if (split.test.empty()) throw TrainError("experiment: empty test split");

  ExperimentResult result;
  result.train_sentences = split.train.size();
  result.dev_sentences = split.dev.size();
  result.test_sentences = split.test.size();

  const WordFrequencyTable train_table = build_word_table(split.train);
  const MarkerStyle style = config.marker_style();
  std::vector<Sentence> source_sentences;
  switch (config.paradigm) {
    case Paradigm::kBpe:
      result.model = train_bpe(train_table, config.vocab_size, style, config.unk_token);
      break;
    case Paradigm::kUnigram: {
      UnigramTrainerConfig uc;
      uc.vocab_size = config.vocab_size;
      uc.seed_size_factor = config.seed_size_factor;
      uc.max_seed_token_len = config.max_seed_token_len;
      uc.prune_fraction = config.prune_fraction;
      uc.em_subiters = config.em_subiters;
      uc.marker_style = style;
      uc.unk_token = config.unk_token;
      result.model = train_unigram(mark_words(train_table, style), uc,
                                   &result.unigram_report);
      break;
    }
    case Paradigm::kObpe: {
      source_sentences = load_conllu_file(config.src_corpus);
      ObpeConfig oc;
      oc.vocab_size = config.vocab_size;
      oc.alpha = config.alpha;
      oc.p = config.p;
      oc.marker_style = style;
      oc.unk_token = config.unk_token;
      BilingualTables tables;
      tables.high = build_word_table(source_sentences);
      tables.low = train_table;
      result.model = train_obpe(tables, oc);
      result.source_sentences = source_sentences.size();
      break;
    }
  }
  log << "train: paradigm=" << paradigm_name(config.paradigm)
      << " vocab=" << result.model.vocab.size()
      << " merges=" << result.model.merges.size() << "\n";
  if (config.paradigm == Paradigm::kUnigram) {
    log << "unigram: seed=" << result.unigram_report.seed_size
        << " prune_rounds=" << result.unigram_report.prune_rounds << "\n";
  }

  std::vector<ProjectedSequence> train_seqs;
  train_seqs.reserve(split.train.size());
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    auto enc = detail::encode_and_project(result.model, split.train[i], config, i,
                                          /*allow_sampling=*/true,
                                          config.skip_misaligned,
                                          &result.skipped_train);
    if (enc) train_seqs.push_back(std::move(enc->projected));
  }
  if (train_seqs.empty()) {
    throw TrainError("experiment: every training sentence was skipped");
  }
  log << "encode-train: sequences=" << train_seqs.size()
      << " skipped=" << result.skipped_train << "\n";

  TaggerModel tagger_model;
  if (config.pretrain_source_tagger) {
    // Source sentences carry their own tags; misaligned ones are always
    // dropped since they are auxiliary data.
    std::vector<ProjectedSequence> source_seqs;
    for (std::size_t i = 0; i < source_sentences.size(); ++i) {
      auto enc = detail::encode_and_project(result.model, source_sentences[i], config,
                                            i, /*allow_sampling=*/false,
                                            /*skip_misaligned=*/true,
                                            &result.skipped_source);
      if (enc) source_seqs.push_back(std::move(enc->projected));
    }
    if (source_seqs.empty()) {
      throw TrainError("experiment: no source sentence survived alignment");
    }
    log << "pretrain: sequences=" << source_seqs.size()
        << " skipped=" << result.skipped_source
        << " epochs=" << config.pretrain_epochs << "\n";
    tagger_model =
        train_tagger_pretrained(source_seqs, train_seqs, config.pretrain_epochs,
                                config.tagger_epochs, config.tagger_seed);
  } else {
    tagger_model = train_tagger(train_seqs, config.tagger_epochs, config.tagger_seed);
  }
  log << "tagger: epochs=" << config.tagger_epochs << " tags=" << tagger_model.tagset.size()
      << " features=" << tagger_model.weights.size() << "\n";

  std::vector<std::string> gold_flat;
  std::vector<std::string> pred_flat;
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    auto enc = detail::encode_and_project(result.model, split.test[i], config, i,
                                          /*allow_sampling=*/false,
                                          config.skip_misaligned,
                                          &result.skipped_test);
    if (!enc) continue;
    const std::vector<std::string> sub_preds = tag(tagger_model, enc->projected);
    std::vector<std::string> token_preds =
        recover_token_predictions(enc->alignment, sub_preds);
    for (const Token& t : split.test[i].tokens) gold_flat.push_back(t.upos);
    for (std::string& p : token_preds) pred_flat.push_back(std::move(p));
  }
  if (gold_flat.empty()) {
    throw TrainError("experiment: every test sentence was skipped");
  }
  result.metrics = compute_metrics(gold_flat, pred_flat);
  result.fertility_train = fertility(result.model, split.train);
  result.fertility_test = fertility(result.model, split.test);
  result.pos_entropy_train = pos_entropy(tag_distribution(split.train));
  log << "tag-test: tokens=" << result.metrics.total
      << " skipped=" << result.skipped_test << "\n";
  log << "metrics: accuracy=" << detail::format_fixed(result.metrics.accuracy)
      << " macro_f1=" << detail::format_fixed(result.metrics.macro_f1) << "\n";

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir), ec);
    if (ec) throw UsageError("cannot create output directory " + out_dir);
    const std::string base = (fs::path(out_dir) / "").string();

    std::ostringstream manifest;
    write_manifest(config, manifest);
    detail::write_text_file(base + "manifest.txt", manifest.str());

    save_model_file(result.model, base + "model.toklab");

    std::ostringstream metrics;
    metrics << "metric\tvalue\n";
    metrics << "accuracy\t" << detail::format_fixed(result.metrics.accuracy) << "\n";
    metrics << "macro_f1\t" << detail::format_fixed(result.metrics.macro_f1) << "\n";
    metrics << "test_tokens\t" << result.metrics.total << "\n";
    metrics << "train_sentences\t" << result.train_sentences << "\n";
    metrics << "dev_sentences\t" << result.dev_sentences << "\n";
    metrics << "test_sentences\t" << result.test_sentences << "\n";
    metrics << "skipped_train_sentences\t" << result.skipped_train << "\n";
    metrics << "skipped_test_sentences\t" << result.skipped_test << "\n";
    metrics << "fertility_train\t" << detail::format_fixed(result.fertility_train) << "\n";
    metrics << "fertility_test\t" << detail::format_fixed(result.fertility_test) << "\n";
    metrics << "pos_entropy_train\t" << detail::format_fixed(result.pos_entropy_train)
            << "\n";
    detail::write_text_file(base + "metrics.tsv", metrics.str());

    std::ostringstream per_tag;
    per_tag << "tag\tprecision\trecall\tf1\tsupport\n";
    for (const auto& [tagname, scores] : result.metrics.per_tag) {
      per_tag << tagname << '\t' << detail::format_fixed(scores.precision) << '\t'
              << detail::format_fixed(scores.recall) << '\t'
              << detail::format_fixed(scores.f1) << '\t' << scores.support << "\n";
    }
    detail::write_text_file(base + "per_tag.tsv", per_tag.str());

    std::ostringstream confusion;
    confusion << "gold\\pred";
    for (const auto& [pred, _] : result.metrics.confusion) confusion << '\t' << pred;
    confusion << "\n";
    for (const auto& [gold, row] : result.metrics.confusion) {
      confusion << gold;
      for (const auto& [pred, count] : row) confusion << '\t' << count;
      confusion << "\n";
    }
    detail::write_text_file(base + "confusion.tsv", confusion.str());

    detail::write_text_file(base + "log.txt", log.str());
  }
  return result;
}

// --- report loading and cross-language analysis ---

struct ReportSummary {
  std::string dir;
  std::string lang;
  Paradigm paradigm = Paradigm::kBpe;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::map<std::string, TagScores> per_tag;
};

inline ReportSummary load_report(const std::string& dir) {
  namespace fs = std::filesystem;
  ReportSummary report;
  report.dir = dir;

  const ExperimentConfig config =
      load_manifest_file((fs::path(dir) / "manifest.txt").string());
  report.lang = config.lang;
  report.paradigm = config.paradigm;

  const std::string metrics_path = (fs::path(dir) / "metrics.tsv").string();
  std::ifstream metrics(metrics_path, std::ios::binary);
  if (!metrics) throw Error("cannot open " + metrics_path);
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  while (std::getline(metrics, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line_no == 1) continue;  // header row
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("metrics.tsv: missing tab", line_no);
    kv[line.substr(0, tab)] = {line.substr(tab + 1), line_no};
  }
  auto metric = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw ParseError(std::string("metrics.tsv: missing metric ") + key, line_no);
    }
    return detail::parse_double_field(it->second.first, key, it->second.second);
  };
  report.accuracy = metric("accuracy");
  report.macro_f1 = metric("macro_f1");

  const std::string per_tag_path = (fs::path(dir) / "per_tag.tsv").string();
  std::ifstream per_tag(per_tag_path, std::ios::binary);
  if (!per_tag) throw Error("cannot open " + per_tag_path);
  line_no = 0;
  while (std::getline(per_tag, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line_no == 1) continue;
    std::vector<std::string> cols;
    std::size_t begin = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', begin);
      cols.push_back(line.substr(begin, tab - begin));
      if (tab == std::string::npos) break;
      begin = tab + 1;
    }
    if (cols.size() != 5) throw ParseError("per_tag.tsv: want 5 columns", line_no);
    TagScores scores;
    scores.precision = detail::parse_double_field(cols[1], "precision", line_no);
    scores.recall = detail::parse_double_field(cols[2], "recall", line_no);
    scores.f1 = detail::parse_double_field(cols[3], "f1", line_no);
    scores.support =
        static_cast<std::size_t>(detail::parse_u64_field(cols[4], "support", line_no));
    report.per_tag[cols[0]] = scores;
  }
  return report;
}

// Language factor sheet: code, training sentences, resource tier, relatedness
// flag, script. A leading header row starting with "code<TAB>" is skipped.
inline std::vector<LanguageProfile> load_profiles_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open profiles file: " + path);
  std::vector<LanguageProfile> profiles;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line_no == 1 && line.starts_with("code\t")) continue;
    std::vector<std::string> cols;
    std::size_t begin = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', begin);
      cols.push_back(line.substr(begin, tab - begin));
      if (tab == std::string::npos) break;
      begin = tab + 1;
    }
    if (cols.size() != 5) {
      throw ParseError("profiles: want 5 tab-separated columns", line_no);
    }
    LanguageProfile profile;
    profile.code = cols[0];
    if (profile.code.empty()) throw ParseError("profiles: empty language code", line_no);
    if (!seen.insert(profile.code).second) {
      throw ParseError("profiles: duplicate language \"" + profile.code + "\"", line_no);
    }
    profile.train_sentences = static_cast<std::size_t>(
        detail::parse_u64_field(cols[1], "profiles: train_sentences", line_no));
    try {
      profile.tier = parse_tier(cols[2]);
      profile.script = parse_script(cols[4]);
    } catch (const Error& e) {
      throw ParseError(std::string("profiles: ") + e.what(), line_no);
    }
    profile.uralic_related =
        detail::parse_bool_field(cols[3], "profiles: uralic_related", line_no);
    profiles.push_back(std::move(profile));
  }
  return profiles;
}

enum class DeltaBaseline { kBest, kBpe, kUnigram };

inline std::string_view delta_baseline_name(DeltaBaseline b) {
  switch (b) {
    case DeltaBaseline::kBest: return "best";
    case DeltaBaseline::kBpe: return "bpe";
    case DeltaBaseline::kUnigram: return "unigram";
  }
  throw ContractError("delta_baseline_name: bad enum");
}

inline DeltaBaseline parse_delta_baseline(std::string_view name) {
  if (name == "best") return DeltaBaseline::kBest;
  if (name == "bpe") return DeltaBaseline::kBpe;
  if (name == "unigram") return DeltaBaseline::kUnigram;
  throw UsageError("unknown baseline \"" + std::string(name) +
                   "\" (want best, bpe or unigram)");
}

struct AnalyzeResult {
  std::vector<GainRecord> gains;
  std::vector<CorrelationRow> correlations;
};

// Cross-language roll-up: per language, the overlap run is compared against a
// baseline run (bpe, unigram, or whichever of the two scored higher), and the
// per-language gains are rank-correlated against the profile factors.
inline AnalyzeResult run_analyze(std::span<const std::string> report_dirs,
                                 const std::string& profiles_path,
                                 DeltaBaseline baseline, const std::string& out_dir) {
  std::map<std::string, std::map<Paradigm, ReportSummary>> by_lang;
  for (const std::string& dir : report_dirs) {
    ReportSummary report = load_report(dir);
    const std::string lang = report.lang;
    const Paradigm paradigm = report.paradigm;
    if (!by_lang[lang].emplace(paradigm, std::move(report)).second) {
      throw UsageError("duplicate report for language \"" + lang + "\" and paradigm " +
                       std::string(paradigm_name(paradigm)));
    }
  }

  struct LanguageGain {
    const ReportSummary* obpe = nullptr;
    const ReportSummary* base = nullptr;
  };
  std::map<std::string, LanguageGain> picked;
  for (const auto& [lang, reports] : by_lang) {
    auto obpe_it = reports.find(Paradigm::kObpe);
    if (obpe_it == reports.end()) {
      throw UsageError("language \"" + lang + "\" has no overlap report");
    }
    const ReportSummary* base = nullptr;
    const auto bpe_it = reports.find(Paradigm::kBpe);
    const auto uni_it = reports.find(Paradigm::kUnigram);
    switch (baseline) {
      case DeltaBaseline::kBpe:
        if (bpe_it != reports.end()) base = &bpe_it->second;
        break;
      case DeltaBaseline::kUnigram:
        if (uni_it != reports.end()) base = &uni_it->second;
        break;
      case DeltaBaseline::kBest:
        if (bpe_it != reports.end()) base = &bpe_it->second;
        if (uni_it != reports.end() &&
            (base == nullptr || uni_it->second.accuracy > base->accuracy)) {
          base = &uni_it->second;
        }
        break;
    }
    if (base == nullptr) {
      throw UsageError("language \"" + lang + "\" has no " +
                       std::string(delta_baseline_name(baseline)) + " baseline report");
    }
    picked[lang] = {&obpe_it->second, base};
  }
  if (picked.size() < 2) {
    throw UsageError("analysis needs reports for at least two languages");
  }

  AnalyzeResult result;
  for (const auto& [lang, g] : picked) {
    GainRecord rec;
    rec.language = lang;
    rec.delta_accuracy = g.obpe->accuracy - g.base->accuracy;
    rec.delta_macro_f1 = g.obpe->macro_f1 - g.base->macro_f1;
    result.gains.push_back(std::move(rec));
  }

  const std::vector<LanguageProfile> profiles = load_profiles_file(profiles_path);
  result.correlations = correlate_gains(result.gains, profiles);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir), ec);
  if (ec) throw UsageError("cannot create output directory " + out_dir);
  const std::string base_dir = (fs::path(out_dir) / "").string();

  std::ostringstream gains;
  gains << "language\tbaseline\tbaseline_accuracy\tobpe_accuracy\tdelta_accuracy"
           "\tbaseline_macro_f1\tobpe_macro_f1\tdelta_macro_f1\n";
  for (const auto& [lang, g] : picked) {
    gains << lang << '\t' << paradigm_name(g.base->paradigm) << '\t'
          << detail::format_fixed(g.base->accuracy) << '\t'
          << detail::format_fixed(g.obpe->accuracy) << '\t'
          << detail::format_fixed(g.obpe->accuracy - g.base->accuracy) << '\t'
          << detail::format_fixed(g.base->macro_f1) << '\t'
          << detail::format_fixed(g.obpe->macro_f1) << '\t'
          << detail::format_fixed(g.obpe->macro_f1 - g.base->macro_f1) << "\n";
  }
  detail::write_text_file(base_dir + "gains.tsv", gains.str());

  std::ostringstream corr;
  corr << "# factor encodings: resource_tier UNDER=0 LOW=1 MID=2 HIGH=3; "
          "uralic_related and latin_script as 0/1\n";
  corr << "# rank correlation of per-language overlap gains against each factor; "
          "a zero-variance column is undefined\n";
  corr << "factor\trho_delta_accuracy\trho_delta_macro_f1\n";
  for (const CorrelationRow& row : result.correlations) {
    corr << row.factor << '\t'
         << (row.rho_delta_accuracy ? detail::format_fixed(*row.rho_delta_accuracy)
                                    : std::string("undefined"))
         << '\t'
         << (row.rho_delta_macro_f1 ? detail::format_fixed(*row.rho_delta_macro_f1)
                                    : std::string("undefined"))
         << "\n";
  }
  detail::write_text_file(base_dir + "correlation.tsv", corr.str());

  std::ostringstream per_tag;
  bool first_lang = true;
  for (const auto& [lang, reports] : by_lang) {
    if (!first_lang) per_tag << "\n";
    first_lang = false;
    per_tag << "language: " << lang << "\n";
    std::set<std::string> tags;
    std::vector<const ReportSummary*> cols;
    for (const auto& [paradigm, report] : reports) {
      cols.push_back(&report);
      for (const auto& [tagname, _] : report.per_tag) tags.insert(tagname);
    }
    std::size_t width = 4;  // "tag" header
    for (const std::string& t : tags) width = std::max(width, t.size() + 1);
    per_tag << std::string("tag").append(width - 3, ' ');
    for (const ReportSummary* r : cols) {
      std::string head(paradigm_name(r->paradigm));
      head.resize(std::max<std::size_t>(head.size() + 1, 9), ' ');
      per_tag << head;
    }
    per_tag << "(F1)\n";
    for (const std::string& tagname : tags) {
      std::string cell = tagname;
      cell.append(width - cell.size(), ' ');
      per_tag << cell;
      for (const ReportSummary* r : cols) {
        auto it = r->per_tag.find(tagname);
        std::string value = it == r->per_tag.end() ? std::string("-")
                                                   : detail::format_fixed(it->second.f1);
        value.resize(std::max<std::size_t>(value.size() + 1, 9), ' ');
        per_tag << value;
      }
      per_tag << "\n";
    }
  }
  detail::write_text_file(base_dir + "per_tag_report.txt", per_tag.str());

  return result;
}

}  // namespace toklab
