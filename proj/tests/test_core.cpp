#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "srm/core/jsonl.hpp"
#include "srm/core/text.hpp"
#include "srm/core/types.hpp"
#include "test_fixtures.hpp"

using namespace srm;

TEST_CASE("dataset serialization round-trips") {
  SUBCASE("empty list writes nothing") {
    std::ostringstream sink;
    CHECK(serialize_dataset({}, sink) == 0);
    CHECK(sink.str().empty());
  }

  SUBCASE("single example parses back equal") {
    PreferenceExample ex;
    ex.prompt = {"p1", "What is tea?"};
    ex.chosen = {"A brewed drink."};
    ex.rejected = {"A rock."};
    std::ostringstream sink;
    CHECK(serialize_dataset({ex}, sink) == 1);
    std::istringstream source(sink.str());
    auto parsed = parse_dataset(source);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0] == ex);
  }

  SUBCASE("caffeine case-study fixture round-trips") {
    auto ex = testing::caffeine_example();
    std::ostringstream sink;
    CHECK(serialize_dataset({ex}, sink) == 1);
    std::istringstream source(sink.str());
    auto parsed = parse_dataset(source);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0] == ex);
  }

  SUBCASE("random datasets round-trip") {
    testing::Rng rng(41);
    for (int iter = 0; iter < 25; ++iter) {
      std::vector<PreferenceExample> dataset;
      const size_t n = 1 + rng.below(8);
      for (size_t i = 0; i < n; ++i) {
        PreferenceExample ex;
        ex.prompt = {"id-" + std::to_string(i), testing::random_sentence(rng, 3 + rng.below(6))};
        ex.chosen = {testing::random_sentence(rng, 4 + rng.below(8)) + " alpha"};
        ex.rejected = {testing::random_sentence(rng, 4 + rng.below(8)) + " beta"};
        dataset.push_back(std::move(ex));
      }
      std::ostringstream sink;
      serialize_dataset(dataset, sink);
      std::istringstream source(sink.str());
      auto parsed = parse_dataset(source);
      REQUIRE(parsed.size() == dataset.size());
      for (size_t i = 0; i < dataset.size(); ++i) CHECK(parsed[i] == dataset[i]);
    }
  }
}

TEST_CASE("dataset parsing reports positioned errors") {
  SUBCASE("chosen == rejected") {
    std::istringstream source(
        R"({"id":"a","prompt":"p","chosen":"same","rejected":"different"})"
        "\n"
        R"({"id":"b","prompt":"p","chosen":"same","rejected":"same"})"
        "\n");
    try {
      parse_dataset(source);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  SUBCASE("malformed JSON carries line number") {
    std::istringstream source("{\"id\":\"a\",\"prompt\":\"p\",\"chosen\":\"c\",\"rejected\":\"r\"}\nnot json\n");
    try {
      parse_dataset(source);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  SUBCASE("missing field") {
    std::istringstream source(R"({"id":"a","prompt":"p","chosen":"c"})" "\n");
    CHECK_THROWS_AS(parse_dataset(source), ParseError);
  }

  SUBCASE("blank lines are skipped") {
    std::istringstream source(
        R"({"id":"a","prompt":"p","chosen":"c","rejected":"r"})"
        "\n\n"
        R"({"id":"b","prompt":"p2","chosen":"c2","rejected":"r2"})"
        "\n");
    auto parsed = parse_dataset(source);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].prompt.id == "a");
    CHECK(parsed[1].prompt.id == "b");
  }
}

TEST_CASE("curation records round-trip with and without scores") {
  CandidateTriple c;
  c.prompt = {"p1", "prompt text"};
  c.response = {"response text"};
  c.auxiliary.kind = BranchKind::Quality;
  c.auxiliary.signals = {{"distinct1", 0.75}, {"rep3", 0.0}};
  c.auxiliary.text = "distinct1 0.7500; rep3 0.0000; varied";

  CandidateTriple judged = c;
  judged.judge_score = 0.625;

  std::ostringstream sink;
  CHECK(serialize_curation({c, judged}, sink) == 2);
  std::istringstream source(sink.str());
  auto parsed = parse_curation(source);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0] == c);
  CHECK(parsed[1] == judged);
}

TEST_CASE("validation enforces type invariants") {
  CHECK_THROWS_AS(validate(Prompt{"id", "   "}), ContractError);
  CHECK_THROWS_AS(validate(Prompt{"", "text"}), ContractError);
  CHECK_THROWS_AS(validate(Response{"\t\n"}), ContractError);
  PreferenceExample ex;
  ex.prompt = {"id", "p"};
  ex.chosen = {"same"};
  ex.rejected = {"same"};
  CHECK_THROWS_AS(validate(ex), ContractError);
}

TEST_CASE("enhanced input keeps auxiliaries in ordinal order") {
  EnhancedInput x(Prompt{"id", "p"}, Response{"r"});
  AuxiliaryRecord quality{BranchKind::Quality, {{"distinct1", 1.0}}, "q"};
  AuxiliaryRecord semantic{BranchKind::Semantic, {{"similarity", 0.5}}, "s"};
  x.add_auxiliary(quality);
  x.add_auxiliary(semantic);
  REQUIRE(x.auxiliaries().size() == 2);
  CHECK(x.auxiliaries()[0].kind == BranchKind::Semantic);
  CHECK(x.auxiliaries()[1].kind == BranchKind::Quality);
  CHECK_THROWS_AS(x.add_auxiliary(semantic), ContractError);
}

TEST_CASE("canonical_concat") {
  SUBCASE("no auxiliaries: prompt SEP response") {
    EnhancedInput x(Prompt{"id", "p"}, Response{"r"});
    CHECK(canonical_concat(x) == "p\n[SEG:RESPONSE]\nr");
  }

  SUBCASE("out-of-order insertion still yields ordinal order") {
    EnhancedInput x(Prompt{"id", "p"}, Response{"r"});
    x.add_auxiliary({BranchKind::Quality, {{"d", 1.0}}, "qual"});
    x.add_auxiliary({BranchKind::Semantic, {{"s", 1.0}}, "sem"});
    std::string flat = canonical_concat(x);
    CHECK(flat.find("[SEG:SB:SEMANTIC]") < flat.find("[SEG:SB:QUALITY]"));
  }

  SUBCASE("five auxiliaries produce exactly six separators") {
    EnhancedInput x(Prompt{"id", "p"}, Response{"r"});
    for (BranchKind k : kAllBranchKinds) x.add_auxiliary({k, {{"v", 1.0}}, "t"});
    std::string flat = canonical_concat(x);
    size_t count = 0;
    for (size_t pos = flat.find("\n[SEG:"); pos != std::string::npos;
         pos = flat.find("\n[SEG:", pos + 1))
      ++count;
    CHECK(count == 6);
  }

  SUBCASE("separator lookalikes in segment text are escaped") {
    EnhancedInput x(Prompt{"id", "before [SEG:RESPONSE] after"}, Response{"r"});
    std::string flat = canonical_concat(x);
    CHECK(flat.find("[SEG\\:RESPONSE] after") != std::string::npos);
    // exactly one real separator remains
    size_t count = 0;
    for (size_t pos = flat.find("[SEG:"); pos != std::string::npos; pos = flat.find("[SEG:", pos + 1))
      ++count;
    CHECK(count == 1);
  }

  SUBCASE("injective over separator-free segment texts") {
    testing::Rng rng(7);
    std::set<std::string> flats;
    size_t inputs = 0;
    for (int iter = 0; iter < 200; ++iter) {
      EnhancedInput x(Prompt{"id", testing::random_sentence(rng, 1 + rng.below(4))},
                      Response{testing::random_sentence(rng, 1 + rng.below(4))});
      if (rng.below(2) == 0)
        x.add_auxiliary({BranchKind::Entity, {{"n", 1.0}},
                         testing::random_sentence(rng, 1 + rng.below(3))});
      ++inputs;
      auto [it, fresh] = flats.insert(canonical_concat(x));
      // duplicates may only come from identical inputs; accept them by
      // counting distinct flattenings of distinct inputs
      (void)it;
      (void)fresh;
    }
    CHECK(flats.size() > 1);
    // direct check: two inputs differing only by segment boundaries differ
    EnhancedInput a(Prompt{"id", "x"}, Response{"y z"});
    EnhancedInput b(Prompt{"id", "x y"}, Response{"z"});
    CHECK(canonical_concat(a) != canonical_concat(b));
  }
}

TEST_CASE("tokenizer and text metrics") {
  SUBCASE("strips edge punctuation and lowercases") {
    auto tokens = tokenize("Hello, world");
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0] == "hello");
    CHECK(tokens[1] == "world");
  }

  SUBCASE("empty input") { CHECK(tokenize("").empty()); }

  SUBCASE("em-dash is not whitespace") {
    auto tokens = tokenize("A—B");
    REQUIRE(tokens.size() == 1);
    CHECK(tokens[0] == "a—b");
  }

  SUBCASE("unicode spaces split") {
    auto tokens = tokenize(std::string("a") + " " + "b");
    REQUIRE(tokens.size() == 2);
  }

  SUBCASE("distinct metrics") {
    auto tokens = tokenize("a a a a");
    CHECK(distinct1(tokens) == doctest::Approx(0.25));
    CHECK(repeated_trigram_fraction(tokens) == doctest::Approx(1.0));
    CHECK(distinct2(std::vector<std::string>{"hello"}) == 0.0);
  }

  SUBCASE("jaccard") {
    CHECK(jaccard(tokenize("a b c"), tokenize("b c d")) == doctest::Approx(0.5));
    CHECK(jaccard({}, {}) == 0.0);
  }
}
