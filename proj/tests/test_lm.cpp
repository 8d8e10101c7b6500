#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "srm/core/text.hpp"
#include "srm/lm/ngram.hpp"
#include "test_fixtures.hpp"

using namespace srm;

namespace {

using Triple = std::tuple<Prompt, Response, std::string>;

Triple make_triple(const std::string& id, const std::string& p, const std::string& r,
                   const std::string& a) {
  return {Prompt{id, p}, Response{r}, a};
}

std::vector<Triple> five_triple_fixture() {
  return {
      make_triple("t1", "describe the drink", "coffee with milk", "clear facts with high quality"),
      make_triple("t2", "describe the snack", "bread with butter", "clear facts with high quality"),
      make_triple("t3", "describe the fruit", "apple and pear", "clear facts with good quality"),
      make_triple("t4", "describe the tool", "hammer and nail", "clear facts with high quality"),
      make_triple("t5", "describe the place", "harbor by the sea", "clear facts with good quality"),
  };
}

// Independent corpus NLL under an explicit conditional-probability table,
// over the same token streams the trainer defines.
double corpus_nll_under_table(
    const std::vector<Triple>& triples, int order,
    const std::function<double(const std::vector<std::string>&, const std::string&)>& prob) {
  double total = 0.0;
  size_t count = 0;
  for (const auto& [p, r, a] : triples) {
    std::vector<std::string> prefix = tokenize(p.text);
    for (auto& t : tokenize(r.text)) prefix.push_back(t);
    prefix.push_back(NgramLM::kBos);
    std::vector<std::string> targets = tokenize(a);
    std::vector<std::string> window = prefix;
    for (const auto& w : targets) {
      std::vector<std::string> ctx(window.end() - (order - 1), window.end());
      total += -std::log(prob(ctx, w));
      window.push_back(w);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace

TEST_CASE("training counts and smoothing") {
  SUBCASE("count ratios on the two-token corpus") {
    // stream: x y <s> b b </s>; contexts of interest: [<s>] -> {b}, [b] -> {b, </s>}
    auto lm = train_lm({make_triple("t", "x", "y", "b b")}, 2, 1e-9);
    CHECK(lm.vocab().size() == 6);  // x y b <s> </s> <unk>

    // after BOS the a-segment starts with b with certainty
    CHECK(lm.probability({NgramLM::kBos}, "b") == doctest::Approx(1.0).epsilon(1e-6));
    // context [b] splits between continuing the segment and ending it
    CHECK(lm.probability({"b"}, "b") == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(lm.probability({"b"}, NgramLM::kEos) == doctest::Approx(0.5).epsilon(1e-6));
  }

  SUBCASE("Laplace floor for unseen continuations") {
    auto lm = train_lm({make_triple("t", "x", "y", "b b")}, 2, 1.0);
    const double v = static_cast<double>(lm.vocab().size());
    // ctx [b] has total count 2; "x" never follows b
    CHECK(lm.probability({"b"}, "x") == doctest::Approx(1.0 / (2.0 + v)));
    // fully unseen context: uniform 1/|V|
    CHECK(lm.probability({"zzz"}, "b") == doctest::Approx(1.0 / v));
  }

  SUBCASE("empty corpus is a training error") {
    CHECK_THROWS_AS(train_lm({}, 2, 0.1), ContractError);
  }

  SUBCASE("empty auxiliary text is a training error") {
    CHECK_THROWS_AS(train_lm({make_triple("t", "p", "r", "  ")}, 2, 0.1), ContractError);
  }
}

TEST_CASE("per-context normalization") {
  auto lm = train_lm(five_triple_fixture(), 3, 0.1);
  // every observed context plus an unseen one must normalize over the vocab
  std::vector<std::vector<std::string>> contexts = {
      {"clear", "facts"}, {"facts", "with"}, {"with", "high"}, {NgramLM::kBos, "clear"},
      {"nope", "nothing"}};
  for (const auto& ctx : contexts) {
    double sum = 0.0;
    for (const auto& w : lm.vocab()) sum += lm.probability(ctx, w);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("mean NLL") {
  SUBCASE("deterministic corpus approaches zero NLL") {
    auto triples = std::vector<Triple>{make_triple("t", "the prompt", "the response",
                                                   "alpha beta gamma delta")};
    auto lm = train_lm(triples, 3, 1e-9);
    auto& [p, r, a] = triples[0];
    CHECK(lm.mean_nll(p, r, a) == doctest::Approx(0.0).epsilon(1e-6));
  }

  SUBCASE("unseen contexts score exactly ln |V|") {
    auto lm = train_lm({make_triple("t", "x", "y", "b b")}, 3, 0.5);
    const double expected = std::log(static_cast<double>(lm.vocab().size()));
    // every token unseen: each scoring context contains an <unk> pattern the
    // training stream never produced, so all probabilities hit the uniform floor
    CHECK(lm.mean_nll(Prompt{"q", "zz qq"}, Response{"ww"}, "vv uu") ==
          doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("matches a brute-force per-token recomputation") {
    auto triples = five_triple_fixture();
    const int order = 3;
    const double alpha = 0.1;
    auto lm = train_lm(triples, order, alpha);

    // oracle: rebuild the counts independently and evaluate token by token
    std::map<std::vector<std::string>, std::map<std::string, uint64_t>> counts;
    std::set<std::string> vocab = {NgramLM::kBos, NgramLM::kEos, NgramLM::kUnk};
    for (const auto& [p, r, a] : triples) {
      std::vector<std::string> stream = tokenize(p.text);
      for (auto& t : tokenize(r.text)) stream.push_back(t);
      stream.push_back(NgramLM::kBos);
      for (auto& t : tokenize(a)) stream.push_back(t);
      stream.push_back(NgramLM::kEos);
      for (const auto& t : stream) vocab.insert(t);
      for (size_t i = 0; i + (order - 1) < stream.size(); ++i)
        ++counts[{stream.begin() + i, stream.begin() + i + (order - 1)}][stream[i + order - 1]];
    }
    auto table_prob = [&](const std::vector<std::string>& ctx, const std::string& w) {
      uint64_t pair = 0, total = 0;
      if (auto it = counts.find(ctx); it != counts.end()) {
        for (const auto& [token, c] : it->second) total += c;
        if (auto jt = it->second.find(w); jt != it->second.end()) pair = jt->second;
      }
      return (pair + alpha) / (total + alpha * vocab.size());
    };

    const auto& [p, r, a] = triples[2];
    double expected = corpus_nll_under_table({triples[2]}, order, table_prob);
    CHECK(lm.mean_nll(p, r, a) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("trained model beats the uniform baseline by at least 0.5 nats") {
    auto triples = five_triple_fixture();
    auto lm = train_lm(triples, 3, 0.1);
    double trained = 0.0;
    for (const auto& [p, r, a] : triples) trained += lm.mean_nll(p, r, a);
    trained /= static_cast<double>(triples.size());
    const double uniform = std::log(static_cast<double>(lm.vocab().size()));
    CHECK(trained <= uniform);
    CHECK(uniform - trained >= 0.5);
  }
}

TEST_CASE("maximum-likelihood optimality within the n-gram family") {
  auto triples = five_triple_fixture();
  const int order = 2;
  auto lm = train_lm(triples, order, 1e-9);

  auto lm_prob = [&](const std::vector<std::string>& ctx, const std::string& w) {
    return lm.probability(ctx, w);
  };
  const double trained_nll = corpus_nll_under_table(triples, order, lm_prob);

  // grid of perturbed models: shift mass away from each context's argmax
  for (double eps : {0.05, 0.1, 0.2, 0.4}) {
    auto perturbed = [&](const std::vector<std::string>& ctx, const std::string& w) {
      // move eps of the argmax token's probability onto <unk>
      std::string best;
      double best_p = -1.0;
      for (const auto& token : lm.vocab()) {
        double p = lm.probability(ctx, token);
        if (p > best_p) {
          best_p = p;
          best = token;
        }
      }
      double p = lm.probability(ctx, w);
      if (w == best) return p * (1.0 - eps);
      if (w == NgramLM::kUnk) return p + best_p * eps;
      return p;
    };
    const double perturbed_nll = corpus_nll_under_table(triples, order, perturbed);
    CHECK(trained_nll <= perturbed_nll + 1e-12);
  }
}

TEST_CASE("held-out NLL does not grow with more data, on average") {
  // synthetic source: second-order preferences over a tiny vocabulary
  auto sample_triple = [](testing::Rng& rng, size_t idx) {
    static const char* subjects[] = {"service", "model", "pipeline"};
    static const char* verbs[] = {"returns", "produces"};
    static const char* objects[] = {"stable results", "clear answers", "ranked outputs"};
    std::string a = std::string(subjects[rng.below(3)]) + " " + verbs[rng.below(2)] + " " +
                    objects[rng.below(3)];
    return make_triple("g" + std::to_string(idx), "evaluate the system", "the system runs", a);
  };

  double avg_small = 0.0, avg_large = 0.0;
  const int seeds[] = {3, 17, 91};
  for (int seed : seeds) {
    testing::Rng rng(static_cast<uint64_t>(seed));
    std::vector<Triple> small, large, heldout;
    for (size_t i = 0; i < 30; ++i) small.push_back(sample_triple(rng, i));
    large = small;
    for (size_t i = 30; i < 150; ++i) large.push_back(sample_triple(rng, i));
    for (size_t i = 0; i < 40; ++i) heldout.push_back(sample_triple(rng, 1000 + i));

    auto lm_small = train_lm(small, 3, 0.1);
    auto lm_large = train_lm(large, 3, 0.1);
    auto mean_nll = [&heldout](const NgramLM& lm) {
      double total = 0.0;
      for (const auto& [p, r, a] : heldout) total += lm.mean_nll(p, r, a);
      return total / static_cast<double>(heldout.size());
    };
    avg_small += mean_nll(lm_small);
    avg_large += mean_nll(lm_large);
  }
  avg_small /= 3.0;
  avg_large /= 3.0;
  CHECK(avg_large <= avg_small);
}

TEST_CASE("generation") {
  SUBCASE("dominant continuation is decoded and stops at EOS") {
    auto lm = train_lm({make_triple("t", "q", "x", "a")}, 3, 0.1);
    auto ctx = conditioning_tokens(Prompt{"t", "q"}, Response{"x"});
    CHECK(lm.generate(ctx, 10) == "a");
  }

  SUBCASE("max_tokens 0 violates the precondition") {
    auto lm = train_lm({make_triple("t", "q", "x", "a")}, 3, 0.1);
    CHECK_THROWS_AS(lm.generate({"q", "x"}, 0), ContractError);
  }

  SUBCASE("equal counts break ties lexicographically") {
    auto lm = train_lm({make_triple("t1", "q", "x", "m zebra"),
                        make_triple("t2", "q", "x", "m apple")},
                       2, 0.1);
    // ctx [m] has zebra and apple tied at one count each
    auto text = lm.generate(conditioning_tokens(Prompt{"t", "q"}, Response{"x"}), 4);
    CHECK(text.rfind("m", 0) == 0);
    CHECK(text.find("apple") != std::string::npos);
    CHECK(text.find("zebra") == std::string::npos);
  }

  SUBCASE("greedy generation is deterministic") {
    auto triples = five_triple_fixture();
    auto lm = train_lm(triples, 3, 0.1);
    auto ctx = conditioning_tokens(Prompt{"t", "describe the drink"}, Response{"coffee with milk"});
    CHECK(lm.generate(ctx, 16) == lm.generate(ctx, 16));
  }

  SUBCASE("sampled generation is deterministic given the seed") {
    auto triples = five_triple_fixture();
    auto lm = train_lm(triples, 3, 0.1);
    auto ctx = conditioning_tokens(Prompt{"t", "describe the drink"}, Response{"coffee with milk"});
    auto a = lm.generate(ctx, 16, 7, NgramLM::Decoding::Sampled);
    auto b = lm.generate(ctx, 16, 7, NgramLM::Decoding::Sampled);
    CHECK(a == b);
  }
}

TEST_CASE("model persistence round-trips bit-exactly") {
  auto lm = train_lm(five_triple_fixture(), 3, 0.1);
  std::string serialized = lm.to_json();
  NgramLM restored = NgramLM::from_json(serialized);
  CHECK(restored == lm);
  CHECK(restored.to_json() == serialized);
  // probabilities survive the round trip exactly
  CHECK(restored.probability({"clear", "facts"}, "with") ==
        lm.probability({"clear", "facts"}, "with"));
}
