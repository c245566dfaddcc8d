#include <fstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "toklab/text.hpp"

using namespace toklab;

TEST_CASE("normalize matches frozen NFKC pairs") {
  std::ifstream in(std::string(TOKLAB_SOURCE_DIR) + "/tests/fixtures/nfkc_pairs.tsv",
                   std::ios::binary);
  REQUIRE(in.good());
  std::string line;
  std::size_t checked = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    const std::string input = line.substr(0, tab);
    const std::string expected = line.substr(tab + 1);
    CAPTURE(input);
    CHECK(normalize(input) == expected);
    CHECK(normalize(expected) == expected);  // idempotent
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("normalize folds compatibility forms") {
  CHECK(normalize("ﬁ Ａ") == "fi A");  // ligature fi, fullwidth A
  CHECK(normalize("") == "");
  CHECK(normalize("plain ascii stays") == "plain ascii stays");
}

TEST_CASE("codepoints splits UTF-8 correctly") {
  const auto cps = codepoints("aä▁\U0001F600");
  REQUIRE(cps.size() == 4);
  CHECK(cps[0] == "a");
  CHECK(cps[1] == "ä");
  CHECK(cps[2] == "▁");
  CHECK(cps[3] == "\U0001F600");
  CHECK(codepoint_count("aä▁\U0001F600") == 4);
  CHECK(codepoint_count("") == 0);
}

TEST_CASE("whitespace splitting covers unicode spaces") {
  const auto words = split_whitespace("  one\ttwo\nthree ? ");
  // no-break space does not separate words
  REQUIRE(words.size() == 3);
  CHECK(words[0] == "one");
  CHECK(words[1] == "two");
  CHECK(words[2] == "three ?");
  CHECK(split_whitespace("").empty());
  CHECK(split_whitespace("   ").empty());
  CHECK(remove_whitespace(" a b\tc ") == "abc");
}

TEST_CASE("ideographic space splits words") {
  const auto words = split_whitespace("a　b");
  REQUIRE(words.size() == 2);
  CHECK(words[0] == "a");
  CHECK(words[1] == "b");
}
