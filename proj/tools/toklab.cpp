// Command line front end: train tokenizers, encode text, run tagged
// experiments, and roll up cross-language reports.
//
// Exit codes: 0 success, 1 usage, 2 bad data (parse, model IO, alignment,
// training, statistics), 3 internal contract violation.

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "toklab/toklab.hpp"

namespace {

using namespace toklab;

struct TrainOptions {
  std::string paradigm = "bpe";
  std::string corpus;
  std::string src_corpus;
  std::string out;
  std::size_t vocab_size = 400;
  std::string marker;  // empty keeps the paradigm default
  std::string unk = std::string(kDefaultUnkToken);
  double alpha = 0.5;
  std::string p = "-inf";
  double seed_size_factor = 20.0;
  std::size_t max_seed_token_len = 16;
  double prune_fraction = 0.25;
  std::size_t em_subiters = 2;
};

void run_train_command(const TrainOptions& opt) {
  const Paradigm paradigm = parse_paradigm(opt.paradigm);
  const MarkerStyle style = opt.marker.empty() ? default_marker_style(paradigm)
                                               : parse_marker_style(opt.marker);
  if (paradigm == Paradigm::kObpe && opt.src_corpus.empty()) {
    throw UsageError("train: overlap training needs --src-corpus");
  }
  if (paradigm != Paradigm::kObpe && !opt.src_corpus.empty()) {
    throw UsageError("train: --src-corpus only applies to the overlap paradigm");
  }
  if (opt.alpha < 0.0 || opt.alpha > 1.0 || std::isnan(opt.alpha)) {
    throw UsageError("train: --alpha must lie in [0, 1]");
  }

  const WordFrequencyTable table =
      build_word_table(load_conllu_file(opt.corpus));
  TokenizerModel model;
  switch (paradigm) {
    case Paradigm::kBpe:
      model = train_bpe(table, opt.vocab_size, style, opt.unk);
      break;
    case Paradigm::kUnigram: {
      UnigramTrainerConfig config;
      config.vocab_size = opt.vocab_size;
      config.seed_size_factor = opt.seed_size_factor;
      config.max_seed_token_len = opt.max_seed_token_len;
      config.prune_fraction = opt.prune_fraction;
      config.em_subiters = opt.em_subiters;
      config.marker_style = style;
      config.unk_token = opt.unk;
      model = train_unigram(mark_words(table, style), config);
      break;
    }
    case Paradigm::kObpe: {
      ObpeConfig config;
      config.vocab_size = opt.vocab_size;
      config.alpha = opt.alpha;
      config.p = MeanExponent::parse(opt.p);
      config.marker_style = style;
      config.unk_token = opt.unk;
      BilingualTables tables;
      tables.high = build_word_table(load_conllu_file(opt.src_corpus));
      tables.low = table;
      model = train_obpe(tables, config);
      break;
    }
  }
  save_model_file(model, opt.out);
  std::cout << "wrote " << opt.out << ": " << paradigm_name(model.paradigm)
            << " model, " << model.vocab.size() << " tokens, "
            << model.merges.size() << " merges\n";
}

struct EncodeOptions {
  std::string model;
  std::vector<std::string> texts;
  double sample_temperature = 0.0;
  std::uint64_t sample_seed = 0;
};

void run_encode_command(const EncodeOptions& opt) {
  const TokenizerModel model = load_model_file(opt.model);
  if (opt.sample_temperature > 0.0 && model.paradigm != Paradigm::kUnigram) {
    throw UsageError("encode: sampling needs a unigram model");
  }
  auto emit = [&](const std::string& text) {
    const std::vector<std::string> tokens =
        opt.sample_temperature > 0.0
            ? encode_sampled(model, text, opt.sample_temperature, opt.sample_seed)
            : encode(model, text);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) std::cout << ' ';
      std::cout << tokens[i];
    }
    std::cout << '\n';
  };
  if (!opt.texts.empty()) {
    for (const std::string& text : opt.texts) emit(text);
    return;
  }
  std::string line;
  while (std::getline(std::cin, line)) emit(line);
}

struct AnalyzeOptions {
  std::vector<std::string> reports;
  std::string profiles;
  std::string baseline = "best";
  std::string out;
};

void run_analyze_command(const AnalyzeOptions& opt) {
  const AnalyzeResult result = run_analyze(opt.reports, opt.profiles,
                                           parse_delta_baseline(opt.baseline), opt.out);
  std::cout << "analyzed " << result.gains.size() << " languages; wrote gains.tsv, "
            << "correlation.tsv and per_tag_report.txt to " << opt.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subword tokenization laboratory"};
  app.require_subcommand(1);

  TrainOptions train_opt;
  CLI::App* train = app.add_subcommand("train", "train a tokenizer on a CoNLL-U corpus");
  train->add_option("--paradigm", train_opt.paradigm, "bpe, unigram or obpe")
      ->capture_default_str();
  train->add_option("--corpus", train_opt.corpus, "CoNLL-U training corpus")->required();
  train->add_option("--src-corpus", train_opt.src_corpus,
                    "transfer-source CoNLL-U corpus (obpe)");
  train->add_option("--out", train_opt.out, "model file to write")->required();
  train->add_option("--vocab-size", train_opt.vocab_size, "total vocabulary budget")
      ->capture_default_str();
  train->add_option("--marker", train_opt.marker,
                    "boundary marker style: underscore or eow (default per paradigm)");
  train->add_option("--unk", train_opt.unk, "unknown token literal")
      ->capture_default_str();
  train->add_option("--alpha", train_opt.alpha, "obpe frequency/overlap weight in [0,1]")
      ->capture_default_str();
  train->add_option("--p", train_opt.p, "obpe mean exponent, a number <= 1 or -inf")
      ->capture_default_str();
  train->add_option("--seed-size-factor", train_opt.seed_size_factor,
                    "unigram seed size as a multiple of the budget")
      ->capture_default_str();
  train->add_option("--max-seed-token-len", train_opt.max_seed_token_len,
                    "unigram: longest seed substring, in code points")
      ->capture_default_str();
  train->add_option("--prune-fraction", train_opt.prune_fraction,
                    "unigram: fraction removed per prune round")
      ->capture_default_str();
  train->add_option("--em-subiters", train_opt.em_subiters,
                    "unigram: EM steps between prune rounds")
      ->capture_default_str();
  train->callback([&] { run_train_command(train_opt); });

  EncodeOptions encode_opt;
  CLI::App* enc = app.add_subcommand("encode", "segment text with a trained model");
  enc->add_option("--model", encode_opt.model, "model file")->required();
  enc->add_option("text", encode_opt.texts,
                  "text arguments; omitted means one line per stdin line");
  enc->add_option("--sample-temperature", encode_opt.sample_temperature,
                  "unigram: sample segmentations at this temperature instead of Viterbi")
      ->capture_default_str();
  enc->add_option("--sample-seed", encode_opt.sample_seed, "sampling seed")
      ->capture_default_str();
  enc->callback([&] { run_encode_command(encode_opt); });

  ExperimentConfig config;
  std::string marker_name;
  std::string p_name = config.p.to_string();
  std::string from_manifest;
  std::string out_dir;
  CLI::App* run = app.add_subcommand(
      "run-experiment", "train, align, tag and score one language/paradigm pair");
  std::vector<CLI::Option*> config_opts;
  auto track = [&](CLI::Option* o) {
    config_opts.push_back(o);
    return o;
  };
  track(run->add_option("--lang", config.lang, "language code for reports"));
  std::string paradigm_name_opt = "bpe";
  track(run->add_option("--paradigm", paradigm_name_opt, "bpe, unigram or obpe")
            ->capture_default_str());
  track(run->add_option("--corpus", config.corpus, "single CoNLL-U corpus to split"));
  track(run->add_option("--src-corpus", config.src_corpus,
                        "transfer-source corpus (obpe)"));
  track(run->add_option("--train-file", config.train_file, "pre-split training file"));
  track(run->add_option("--dev-file", config.dev_file, "pre-split development file"));
  track(run->add_option("--test-file", config.test_file, "pre-split test file"));
  track(run->add_option("--split", config.split,
                        "auto or colon weights like 6:2:2")
            ->capture_default_str());
  track(run->add_option("--split-seed", config.split_seed, "shuffle seed for the split")
            ->capture_default_str());
  track(run->add_option("--low-resource-threshold", config.low_resource_threshold,
                        "sentence count under which auto picks 6:2:2")
            ->capture_default_str());
  track(run->add_option("--vocab-size", config.vocab_size, "total vocabulary budget")
            ->capture_default_str());
  track(run->add_option("--marker", marker_name,
                        "underscore or eow (default per paradigm)"));
  track(run->add_option("--unk", config.unk_token, "unknown token literal")
            ->capture_default_str());
  track(run->add_option("--alpha", config.alpha, "obpe frequency/overlap weight")
            ->capture_default_str());
  track(run->add_option("--p", p_name, "obpe mean exponent, a number <= 1 or -inf")
            ->capture_default_str());
  track(run->add_option("--seed-size-factor", config.seed_size_factor,
                        "unigram seed size multiple")
            ->capture_default_str());
  track(run->add_option("--max-seed-token-len", config.max_seed_token_len,
                        "unigram longest seed substring")
            ->capture_default_str());
  track(run->add_option("--prune-fraction", config.prune_fraction,
                        "unigram prune fraction")
            ->capture_default_str());
  track(run->add_option("--em-subiters", config.em_subiters,
                        "unigram EM steps per round")
            ->capture_default_str());
  track(run->add_option("--tagger-epochs", config.tagger_epochs, "perceptron epochs")
            ->capture_default_str());
  track(run->add_option("--tagger-seed", config.tagger_seed, "perceptron shuffle seed")
            ->capture_default_str());
  track(run->add_flag("--pretrain-source-tagger", config.pretrain_source_tagger,
                      "warm-start the tagger on the transfer source (obpe)"));
  track(run->add_option("--pretrain-epochs", config.pretrain_epochs,
                        "epochs on the transfer source before target training")
            ->capture_default_str());
  track(run->add_flag("--skip-misaligned", config.skip_misaligned,
                      "drop sentences whose subwords fail to align"));
  track(run->add_option("--sample-temperature", config.sample_temperature,
                        "unigram: sample training segmentations at this temperature")
            ->capture_default_str());
  track(run->add_option("--sample-seed", config.sample_seed, "sampling seed")
            ->capture_default_str());
  run->add_option("--out", out_dir, "report directory to write")->required();
  CLI::Option* manifest_opt = run->add_option(
      "--from-manifest", from_manifest, "replay a previous run from its manifest.txt");
  for (CLI::Option* o : config_opts) manifest_opt->excludes(o);
  run->callback([&] {
    ExperimentConfig effective;
    if (!from_manifest.empty()) {
      effective = load_manifest_file(from_manifest);
    } else {
      effective = config;
      effective.paradigm = parse_paradigm(paradigm_name_opt);
      if (!marker_name.empty()) effective.marker = parse_marker_style(marker_name);
      effective.p = MeanExponent::parse(p_name);
    }
    const ExperimentResult result = run_experiment(effective, out_dir);
    std::cout << "lang=" << effective.lang
              << " paradigm=" << paradigm_name(effective.paradigm)
              << " accuracy=" << toklab::detail::format_fixed(result.metrics.accuracy)
              << " macro_f1=" << toklab::detail::format_fixed(result.metrics.macro_f1)
              << " report=" << out_dir << "\n";
  });

  AnalyzeOptions analyze_opt;
  CLI::App* analyze =
      app.add_subcommand("analyze", "compare overlap runs against baselines across languages");
  analyze->add_option("reports", analyze_opt.reports, "experiment report directories")
      ->required();
  analyze->add_option("--profiles", analyze_opt.profiles, "language profile TSV")
      ->required();
  analyze->add_option("--delta-baseline", analyze_opt.baseline,
                      "baseline per language: best, bpe or unigram")
      ->capture_default_str();
  analyze->add_option("--out", analyze_opt.out, "analysis directory to write")->required();
  analyze->callback([&] { run_analyze_command(analyze_opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const toklab::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const toklab::ContractError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const toklab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
