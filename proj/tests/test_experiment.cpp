#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "toklab/experiment.hpp"

using namespace toklab;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const std::string kData = std::string(TOKLAB_SOURCE_DIR) + "/data/";
const std::string kFixtures = std::string(TOKLAB_SOURCE_DIR) + "/tests/fixtures/";

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "toklab_experiment_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentConfig south_bpe() {
  ExperimentConfig config;
  config.lang = "south";
  config.paradigm = Paradigm::kBpe;
  config.corpus = kData + "south.conllu";
  config.vocab_size = 220;
  config.tagger_epochs = 3;
  return config;
}

const std::vector<std::string> kReportFiles = {
    "manifest.txt", "model.toklab", "metrics.tsv",
    "per_tag.tsv",  "confusion.tsv", "log.txt"};

void write_fake_report(const fs::path& dir, const std::string& lang, Paradigm paradigm,
                       double accuracy, double macro_f1,
                       const std::vector<std::pair<std::string, double>>& tag_f1) {
  fs::create_directories(dir);
  ExperimentConfig config;
  config.lang = lang;
  config.paradigm = paradigm;
  config.corpus = "corpus.conllu";
  if (paradigm == Paradigm::kObpe) config.src_corpus = "src.conllu";
  std::ostringstream manifest;
  write_manifest(config, manifest);
  std::ofstream(dir / "manifest.txt", std::ios::binary) << manifest.str();
  std::ofstream(dir / "metrics.tsv", std::ios::binary)
      << "metric\tvalue\naccuracy\t" << toklab::detail::format_double(accuracy)
      << "\nmacro_f1\t" << toklab::detail::format_double(macro_f1) << "\n";
  std::ofstream per_tag(dir / "per_tag.tsv", std::ios::binary);
  per_tag << "tag\tprecision\trecall\tf1\tsupport\n";
  for (const auto& [tag, f1] : tag_f1) {
    per_tag << tag << "\t0.5\t0.5\t" << toklab::detail::format_double(f1) << "\t10\n";
  }
}

}  // namespace

TEST_CASE("split weights parse from colon notation") {
  const SplitSpec spec = parse_split_weights("6:2:2");
  CHECK(spec.train_weight == 6);
  CHECK(spec.dev_weight == 2);
  CHECK(spec.test_weight == 2);
  const SplitSpec skewed = parse_split_weights("8:1:1");
  CHECK(skewed.train_weight == 8);

  for (const char* bad : {"6:2", "a:b:c", "0:1:1", "-1:2:2", "1:2:3:4", "", "::"}) {
    INFO("input: " << bad);
    CHECK_THROWS_AS(parse_split_weights(bad), UsageError);
  }
}

TEST_CASE("experiment config validation") {
  ExperimentConfig config = south_bpe();
  CHECK_NOTHROW(config.validate());

  SECTION("language required") {
    config.lang.clear();
    CHECK_THROWS_AS(config.validate(), UsageError);
  }
  SECTION("explicit mode needs both ends") {
    config.corpus.clear();
    config.train_file = "train.conllu";
    CHECK_THROWS_AS(config.validate(), UsageError);
    config.test_file = "test.conllu";
    CHECK_NOTHROW(config.validate());
  }
  SECTION("corpus and explicit files are exclusive") {
    config.train_file = "train.conllu";
    config.test_file = "test.conllu";
    CHECK_THROWS_AS(config.validate(), UsageError);
  }
  SECTION("a corpus is required somewhere") {
    config.corpus.clear();
    CHECK_THROWS_AS(config.validate(), UsageError);
  }
  SECTION("overlap paradigm owns the source corpus") {
    config.paradigm = Paradigm::kObpe;
    CHECK_THROWS_AS(config.validate(), UsageError);  // missing source
    config.src_corpus = "north.conllu";
    CHECK_NOTHROW(config.validate());
    config.paradigm = Paradigm::kBpe;
    CHECK_THROWS_AS(config.validate(), UsageError);  // source without overlap
  }
  SECTION("pretraining requires the overlap paradigm") {
    config.pretrain_source_tagger = true;
    CHECK_THROWS_AS(config.validate(), UsageError);
    config.paradigm = Paradigm::kObpe;
    config.src_corpus = "north.conllu";
    CHECK_NOTHROW(config.validate());
    config.pretrain_epochs = 0;
    CHECK_THROWS_AS(config.validate(), UsageError);
  }
  SECTION("sampling is a unigram feature") {
    config.sample_temperature = 0.5;
    CHECK_THROWS_AS(config.validate(), UsageError);
    config.paradigm = Paradigm::kUnigram;
    CHECK_NOTHROW(config.validate());
    config.sample_temperature = -0.5;
    CHECK_THROWS_AS(config.validate(), UsageError);
  }
  SECTION("epoch and alpha ranges") {
    config.tagger_epochs = 0;
    CHECK_THROWS_AS(config.validate(), UsageError);
    config.tagger_epochs = 1;
    config.alpha = 1.5;
    CHECK_THROWS_AS(config.validate(), UsageError);
    config.alpha = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(config.validate(), UsageError);
  }
}

TEST_CASE("manifests round-trip every field") {
  ExperimentConfig config;
  config.lang = "east";
  config.paradigm = Paradigm::kObpe;
  config.corpus = "data/east.conllu";
  config.src_corpus = "data/north.conllu";
  config.split = "7:2:1";
  config.split_seed = 9;
  config.low_resource_threshold = 500;
  config.vocab_size = 321;
  config.marker = MarkerStyle::kWordInitialUnderscore;
  config.unk_token = "<oov>";
  config.alpha = 0.75;
  config.p = MeanExponent::parse("-0.5");
  config.seed_size_factor = 12.5;
  config.max_seed_token_len = 9;
  config.prune_fraction = 0.1;
  config.em_subiters = 3;
  config.tagger_epochs = 7;
  config.tagger_seed = 123;
  config.pretrain_source_tagger = true;
  config.pretrain_epochs = 4;
  config.skip_misaligned = true;
  config.sample_temperature = 0.0;
  config.sample_seed = 77;

  std::ostringstream out;
  write_manifest(config, out);
  std::istringstream in(out.str());
  const ExperimentConfig back = parse_manifest(in);

  CHECK(back.lang == config.lang);
  CHECK(back.paradigm == config.paradigm);
  CHECK(back.corpus == config.corpus);
  CHECK(back.src_corpus == config.src_corpus);
  CHECK(back.train_file.empty());
  CHECK(back.split == config.split);
  CHECK(back.split_seed == config.split_seed);
  CHECK(back.low_resource_threshold == config.low_resource_threshold);
  CHECK(back.vocab_size == config.vocab_size);
  REQUIRE(back.marker.has_value());
  CHECK(*back.marker == MarkerStyle::kWordInitialUnderscore);
  CHECK(back.unk_token == config.unk_token);
  CHECK(back.alpha == config.alpha);
  CHECK(back.p.to_string() == "-0.5");
  CHECK(back.seed_size_factor == config.seed_size_factor);
  CHECK(back.max_seed_token_len == config.max_seed_token_len);
  CHECK(back.prune_fraction == config.prune_fraction);
  CHECK(back.em_subiters == config.em_subiters);
  CHECK(back.tagger_epochs == config.tagger_epochs);
  CHECK(back.tagger_seed == config.tagger_seed);
  CHECK(back.pretrain_source_tagger == config.pretrain_source_tagger);
  CHECK(back.pretrain_epochs == config.pretrain_epochs);
  CHECK(back.skip_misaligned == config.skip_misaligned);
  CHECK(back.sample_temperature == config.sample_temperature);
  CHECK(back.sample_seed == config.sample_seed);

  // Parsing and re-writing reproduces the same bytes.
  std::ostringstream again;
  write_manifest(back, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("manifest parsing rejects malformed input") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_manifest(in);
  };
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("toklab-manifest\t2\n"), ParseError);
  CHECK_THROWS_AS(parse("not-a-manifest\t1\n"), ParseError);
  CHECK_THROWS_AS(parse("toklab-manifest\t1\nalpha missing tab\n"), ParseError);
  CHECK_THROWS_AS(parse("toklab-manifest\t1\nalpha\t0.5\nalpha\t0.6\n"), ParseError);
  CHECK_THROWS_AS(parse("toklab-manifest\t1\nalpha\t0.5\n"), ParseError);  // keys missing

  // A single corrupted value inside an otherwise complete manifest.
  std::ostringstream out;
  write_manifest(south_bpe(), out);
  std::string text = out.str();
  auto corrupt = [&](const std::string& from, const std::string& to) {
    std::string copy = text;
    const std::size_t pos = copy.find(from);
    REQUIRE(pos != std::string::npos);
    copy.replace(pos, from.size(), to);
    return copy;
  };
  CHECK_THROWS_MATCHES(
      parse(corrupt("vocab_size\t220", "vocab_size\tlots")), ParseError,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::ContainsSubstring("vocab_size")));
  CHECK_THROWS_AS(parse(corrupt("skip_misaligned\t0", "skip_misaligned\t2")),
                  ParseError);
  CHECK_THROWS_AS(parse(corrupt("alpha\t0.5", "alpha\tmid")), ParseError);
  CHECK_THROWS_AS(parse(corrupt("paradigm\tbpe", "paradigm\twordpiece")), UsageError);

  CHECK_THROWS_AS(load_manifest_file("/nonexistent/manifest.txt"), Error);
}

TEST_CASE("a corpus experiment runs end to end and writes a report") {
  const fs::path dir = fresh_dir("bpe_a");
  const ExperimentConfig config = south_bpe();
  const ExperimentResult result = run_experiment(config, dir.string());

  // 200 bundled sentences fall under the low-resource threshold: 6:2:2.
  CHECK(result.train_sentences == 120);
  CHECK(result.dev_sentences == 40);
  CHECK(result.test_sentences == 40);
  CHECK(result.skipped_train == 0);
  CHECK(result.skipped_test == 0);
  CHECK(result.metrics.total > 0);
  CHECK(result.metrics.accuracy >= 0.0);
  CHECK(result.metrics.accuracy <= 1.0);
  CHECK(result.metrics.macro_f1 >= 0.0);
  CHECK(result.fertility_train >= 1.0);
  CHECK(result.fertility_test >= 1.0);
  CHECK(result.pos_entropy_train > 0.0);
  CHECK(result.model.paradigm == Paradigm::kBpe);
  CHECK(result.model.vocab.size() <= config.vocab_size);

  for (const std::string& name : kReportFiles) {
    INFO("missing " << name);
    CHECK(fs::exists(dir / name));
  }

  // The written metrics match the returned ones at fixed precision.
  const std::string metrics = slurp(dir / "metrics.tsv");
  CHECK(metrics.find("accuracy\t" +
                     toklab::detail::format_fixed(result.metrics.accuracy)) !=
        std::string::npos);
  CHECK(metrics.find("train_sentences\t120") != std::string::npos);
  CHECK(metrics.find("pos_entropy_train\t" +
                     toklab::detail::format_fixed(result.pos_entropy_train)) !=
        std::string::npos);

  // The saved model loads back and is the same tokenizer.
  const TokenizerModel saved = load_model_file((dir / "model.toklab").string());
  CHECK(saved.vocab.tokens() == result.model.vocab.tokens());
  CHECK(saved.merges == result.model.merges);

  // The log names the pipeline stages and carries no machine specifics.
  const std::string log = slurp(dir / "log.txt");
  CHECK(log.find("split: train=120 dev=40 test=40") != std::string::npos);
  CHECK(log.find("train: paradigm=bpe") != std::string::npos);
  CHECK(log.find("metrics: accuracy=") != std::string::npos);
  CHECK(log.find(dir.string()) == std::string::npos);

  // The manifest in the report replays to the identical configuration.
  const ExperimentConfig replay = load_manifest_file((dir / "manifest.txt").string());
  CHECK(replay.lang == config.lang);
  CHECK(replay.corpus == config.corpus);
  CHECK(replay.vocab_size == config.vocab_size);
}

TEST_CASE("experiment outputs are byte-deterministic") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  const ExperimentConfig config = south_bpe();
  const ExperimentResult ra = run_experiment(config, a.string());
  const ExperimentResult rb = run_experiment(config, b.string());
  CHECK(ra.metrics.accuracy == rb.metrics.accuracy);
  for (const std::string& name : kReportFiles) {
    INFO("file " << name);
    CHECK(slurp(a / name) == slurp(b / name));
  }

  // Replaying from the written manifest reproduces the same bytes again.
  const ExperimentConfig replay = load_manifest_file((a / "manifest.txt").string());
  const fs::path c = fresh_dir("det_c");
  run_experiment(replay, c.string());
  for (const std::string& name : kReportFiles) {
    INFO("file " << name);
    CHECK(slurp(a / name) == slurp(c / name));
  }
}

TEST_CASE("sampled unigram training stays deterministic") {
  ExperimentConfig config;
  config.lang = "south";
  config.paradigm = Paradigm::kUnigram;
  config.corpus = kData + "south.conllu";
  config.vocab_size = 140;
  config.seed_size_factor = 8.0;
  config.tagger_epochs = 2;
  config.sample_temperature = 0.8;
  config.sample_seed = 5;

  const fs::path a = fresh_dir("uni_a");
  const fs::path b = fresh_dir("uni_b");
  const ExperimentResult ra = run_experiment(config, a.string());
  run_experiment(config, b.string());
  CHECK(ra.model.paradigm == Paradigm::kUnigram);
  CHECK(ra.unigram_report.seed_size > 0);
  CHECK(ra.fertility_test >= 1.0);
  for (const std::string& name : kReportFiles) {
    INFO("file " << name);
    CHECK(slurp(a / name) == slurp(b / name));
  }

  // A different sampling seed changes training but not the written config keys
  // other than the seed itself.
  ExperimentConfig other = config;
  other.sample_seed = 6;
  const fs::path c = fresh_dir("uni_c");
  const ExperimentResult rc = run_experiment(other, c.string());
  CHECK(rc.test_sentences == ra.test_sentences);
}

TEST_CASE("overlap experiments pull in the transfer source") {
  ExperimentConfig config;
  config.lang = "south";
  config.paradigm = Paradigm::kObpe;
  config.corpus = kData + "south.conllu";
  config.src_corpus = kData + "north.conllu";
  config.vocab_size = 260;
  config.alpha = 0.5;
  config.tagger_epochs = 2;
  config.pretrain_source_tagger = true;
  config.pretrain_epochs = 1;

  const fs::path dir = fresh_dir("obpe_a");
  const ExperimentResult result = run_experiment(config, dir.string());
  CHECK(result.model.paradigm == Paradigm::kObpe);
  CHECK(result.source_sentences == 240);  // the whole transfer corpus
  CHECK(result.skipped_source <= result.source_sentences);
  CHECK(result.metrics.total > 0);

  const std::string log = slurp(dir / "log.txt");
  CHECK(log.find("pretrain: sequences=") != std::string::npos);
}

TEST_CASE("experiments fail cleanly on degenerate inputs") {
  ExperimentConfig config = south_bpe();

  SECTION("missing corpus file") {
    config.corpus = kData + "atlantis.conllu";
    CHECK_THROWS_AS(run_experiment(config), Error);
  }
  SECTION("empty test split in explicit mode") {
    config.corpus.clear();
    config.train_file = kData + "south.conllu";
    config.test_file = kFixtures + "empty.conllu";
    CHECK_THROWS_AS(run_experiment(config), TrainError);
  }
  SECTION("empty training split in explicit mode") {
    config.corpus.clear();
    config.train_file = kFixtures + "empty.conllu";
    config.test_file = kData + "south.conllu";
    CHECK_THROWS_AS(run_experiment(config), TrainError);
  }
  SECTION("unwritable output directory") {
    const fs::path blocked = fs::path(kFixtures) / "empty.conllu" / "sub";
    CHECK_THROWS_AS(run_experiment(config, blocked.string()), UsageError);
  }
}

TEST_CASE("reports load back as summaries") {
  const fs::path dir = fresh_dir("load_report");
  const ExperimentConfig config = south_bpe();
  const ExperimentResult result = run_experiment(config, dir.string());

  const ReportSummary summary = load_report(dir.string());
  CHECK(summary.dir == dir.string());
  CHECK(summary.lang == "south");
  CHECK(summary.paradigm == Paradigm::kBpe);
  // metrics.tsv stores six decimal places.
  CHECK(summary.accuracy == Approx(result.metrics.accuracy).margin(5e-7));
  CHECK(summary.macro_f1 == Approx(result.metrics.macro_f1).margin(5e-7));
  REQUIRE_FALSE(summary.per_tag.empty());
  const auto& [tag, scores] = *summary.per_tag.begin();
  CHECK(scores.support == result.metrics.per_tag.at(tag).support);

  CHECK_THROWS_AS(load_report((dir / "nothing_here").string()), Error);
}

TEST_CASE("language profiles load from the bundled sheet") {
  const std::vector<LanguageProfile> profiles =
      load_profiles_file(kData + "profiles.tsv");
  REQUIRE(profiles.size() == 3);
  CHECK(profiles[0].code == "south");
  CHECK(profiles[0].train_sentences == 120);
  CHECK(profiles[0].tier == ResourceTier::kLow);
  CHECK(profiles[0].uralic_related);
  CHECK(profiles[0].script == Script::kLatin);
  CHECK(profiles[2].code == "west");
  CHECK_FALSE(profiles[2].uralic_related);
  CHECK(profiles[2].script == Script::kCyrillic);
}

TEST_CASE("profile parsing reports the offending line") {
  const fs::path dir = fresh_dir("profiles");
  auto write_and_load = [&](const char* name, const std::string& content) {
    const fs::path p = dir / name;
    std::ofstream(p, std::ios::binary) << content;
    return load_profiles_file(p.string());
  };

  // Comments and a header row are fine.
  const auto ok = write_and_load(
      "ok.tsv", "code\ttrain_sentences\ttier\trelated\tscript\n# comment\n"
                "xx\t10\tMID\t0\tLATIN\n");
  REQUIRE(ok.size() == 1);
  CHECK(ok[0].tier == ResourceTier::kMid);

  CHECK_THROWS_MATCHES(
      write_and_load("cols.tsv", "xx\t10\tMID\t0\n"), ParseError,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("line 1")));
  CHECK_THROWS_MATCHES(
      write_and_load("tier.tsv", "xx\t10\tHUGE\t0\tLATIN\n"), ParseError,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::ContainsSubstring("unknown resource tier")));
  CHECK_THROWS_MATCHES(
      write_and_load("script.tsv", "xx\t10\tMID\t0\tRUNIC\n"), ParseError,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::ContainsSubstring("unknown script")));
  CHECK_THROWS_AS(write_and_load("bool.tsv", "xx\t10\tMID\t2\tLATIN\n"), ParseError);
  CHECK_THROWS_AS(write_and_load("count.tsv", "xx\tmany\tMID\t0\tLATIN\n"), ParseError);
  CHECK_THROWS_MATCHES(
      write_and_load("dup.tsv", "xx\t10\tMID\t0\tLATIN\nxx\t11\tLOW\t1\tLATIN\n"),
      ParseError,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("line 2")));
  CHECK_THROWS_AS(load_profiles_file("/nonexistent/profiles.tsv"), Error);
}

TEST_CASE("cross-language analysis rolls up gains and correlations") {
  const fs::path root = fresh_dir("analyze");
  const std::vector<std::pair<std::string, double>> noun = {{"NOUN", 0.6}, {"VERB", 0.4}};
  const std::vector<std::pair<std::string, double>> extra = {
      {"NOUN", 0.5}, {"VERB", 0.3}, {"NUM", 0.2}};

  // Macro-F1 values are exact binary fractions so every best-baseline delta
  // is the same double (0.25) and the zero-variance path is really hit.
  write_fake_report(root / "south_obpe", "south", Paradigm::kObpe, 0.82, 0.75, noun);
  write_fake_report(root / "south_bpe", "south", Paradigm::kBpe, 0.75, 0.5, noun);
  write_fake_report(root / "east_obpe", "east", Paradigm::kObpe, 0.70, 0.625, noun);
  write_fake_report(root / "east_bpe", "east", Paradigm::kBpe, 0.60, 0.5, noun);
  write_fake_report(root / "east_uni", "east", Paradigm::kUnigram, 0.65, 0.375, extra);
  write_fake_report(root / "west_obpe", "west", Paradigm::kObpe, 0.50, 0.5, noun);
  write_fake_report(root / "west_bpe", "west", Paradigm::kBpe, 0.55, 0.25, noun);

  std::vector<std::string> dirs;
  for (const char* d : {"south_obpe", "south_bpe", "east_obpe", "east_bpe", "east_uni",
                        "west_obpe", "west_bpe"}) {
    dirs.push_back((root / d).string());
  }
  const std::string profiles = kData + "profiles.tsv";

  SECTION("best baseline") {
    const fs::path out = root / "out_best";
    const AnalyzeResult result =
        run_analyze(dirs, profiles, DeltaBaseline::kBest, out.string());

    REQUIRE(result.gains.size() == 3);
    CHECK(result.gains[0].language == "east");
    // East's best baseline by accuracy is the unigram run at 0.65.
    CHECK(result.gains[0].delta_accuracy == Approx(0.05));
    CHECK(result.gains[0].delta_macro_f1 == Approx(0.25));
    CHECK(result.gains[1].language == "south");
    CHECK(result.gains[1].delta_accuracy == Approx(0.07));
    CHECK(result.gains[2].language == "west");
    CHECK(result.gains[2].delta_accuracy == Approx(-0.05));

    REQUIRE(result.correlations.size() == 4);
    CHECK(result.correlations[0].factor == "train_sentences");
    REQUIRE(result.correlations[0].rho_delta_accuracy.has_value());
    CHECK(*result.correlations[0].rho_delta_accuracy ==
          Approx(oracle::reference_spearman({96, 120, 96}, {0.05, 0.07, -0.05}))
              .margin(1e-12));
    // Every macro-F1 gain is exactly 0.25: zero variance, undefined rho.
    for (const CorrelationRow& row : result.correlations) {
      CHECK_FALSE(row.rho_delta_macro_f1.has_value());
    }

    const std::string gains = slurp(out / "gains.tsv");
    CHECK(gains.find("east\tunigram\t0.650000\t0.700000\t0.050000\t0.375000\t"
                     "0.625000\t0.250000\n") != std::string::npos);
    CHECK(gains.find("west\tbpe\t0.550000\t0.500000\t-0.050000") != std::string::npos);

    const std::string corr = slurp(out / "correlation.tsv");
    CHECK(corr.find("# factor encodings") != std::string::npos);
    CHECK(corr.find("undefined") != std::string::npos);
    CHECK(corr.find("uralic_related\t") != std::string::npos);

    const std::string per_tag = slurp(out / "per_tag_report.txt");
    CHECK(per_tag.find("language: east") != std::string::npos);
    CHECK(per_tag.find("(F1)") != std::string::npos);
    // NUM only exists in the east unigram report; other columns show a dash.
    CHECK(per_tag.find("NUM") != std::string::npos);
    CHECK(per_tag.find("-") != std::string::npos);
  }

  SECTION("fixed bpe baseline") {
    const fs::path out = root / "out_bpe";
    const AnalyzeResult result =
        run_analyze(dirs, profiles, DeltaBaseline::kBpe, out.string());
    CHECK(result.gains[0].delta_accuracy == Approx(0.10));  // east vs its bpe run
    // Macro-F1 deltas now vary, so the column is defined where x varies.
    REQUIRE(result.correlations[0].rho_delta_macro_f1.has_value());
  }

  SECTION("usage errors") {
    std::vector<std::string> dup = dirs;
    dup.push_back(dirs[0]);
    CHECK_THROWS_MATCHES(
        run_analyze(dup, profiles, DeltaBaseline::kBest, (root / "x").string()),
        UsageError,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("duplicate report")));

    const std::vector<std::string> missing_obpe = {dirs[0], dirs[1],
                                                   (root / "east_bpe").string()};
    CHECK_THROWS_MATCHES(
        run_analyze(missing_obpe, profiles, DeltaBaseline::kBest,
                    (root / "x").string()),
        UsageError,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("no overlap report")));

    const std::vector<std::string> one_lang = {dirs[0], dirs[1]};
    CHECK_THROWS_MATCHES(
        run_analyze(one_lang, profiles, DeltaBaseline::kBest, (root / "x").string()),
        UsageError,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("at least two languages")));

    CHECK_THROWS_MATCHES(
        run_analyze(dirs, profiles, DeltaBaseline::kUnigram, (root / "x").string()),
        UsageError,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("no unigram baseline")));

    CHECK_THROWS_AS(parse_delta_baseline("median"), UsageError);
    CHECK(parse_delta_baseline("best") == DeltaBaseline::kBest);
    CHECK(delta_baseline_name(DeltaBaseline::kUnigram) == "unigram");
  }
}
