#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <set>
#include <thread>

#include "srm/branch/builtin.hpp"
#include "srm/branch/embedding.hpp"
#include "srm/branch/fanout.hpp"
#include "srm/branch/remote.hpp"
#include "srm/core/text.hpp"
#include "test_fixtures.hpp"

using namespace srm;

namespace {

std::shared_ptr<const BuiltinResources> caffeine_resources() {
  auto res = std::make_shared<BuiltinResources>();
  res->kg = KnowledgeGraph::from_json_text(R"({
    "entities": ["coffee", "caffeine"],
    "edges": [["coffee", "reduces-risk-of", "cardiovascular disease"]],
    "attributes": []
  })");
  res->claims = ClaimStore::from_json_text(R"([
    {"subject": "caffeine", "predicate": "weakens", "object": "bones", "refuted": true},
    {"subject": "caffeine", "predicate": "enhances", "object": "cognitive performance", "refuted": false}
  ])");
  res->lexicon = FormalLexicon({"furthermore", "consequently", "methodology", "demonstrates",
                                "substantial", "analysis"});
  return res;
}

BranchSpec scripted_spec(BranchKind kind, int delay_ms, const std::string& text) {
  ScriptedBackend backend;
  AuxiliaryRecord rec;
  rec.kind = kind;
  rec.signals["scripted"] = 1.0;
  rec.text = text;
  backend.fallback = std::move(rec);
  backend.delay = std::chrono::milliseconds(delay_ms);
  BranchSpec spec;
  spec.kind = kind;
  spec.backend = std::move(backend);
  spec.timeout = std::chrono::milliseconds(5000);
  return spec;
}

}  // namespace

TEST_CASE("hashed embedding") {
  SUBCASE("deterministic") {
    auto a = embed("the quick brown fox", 128);
    auto b = embed("the quick brown fox", 128);
    CHECK(a.vector == b.vector);
  }

  SUBCASE("empty text is the zero vector") {
    auto e = embed("", 64);
    for (double v : e.vector) CHECK(v == 0.0);
  }

  SUBCASE("word order changes bigram components only") {
    const size_t dim = 64;
    auto ab = embed("a b", dim);
    auto ba = embed("b a", dim);

    // oracle: accumulate expected coordinates from the pinned hash directly
    std::vector<double> expect_ab(dim, 0.0), expect_ba(dim, 0.0);
    for (const char* t : {"a", "b"}) {
      auto [idx, sign] = hashed_feature(t, dim);
      expect_ab[idx] += sign;
      expect_ba[idx] += sign;
    }
    {
      auto [idx, sign] = hashed_feature(std::string("a") + '\x1f' + "b", dim);
      expect_ab[idx] += sign;
    }
    {
      auto [idx, sign] = hashed_feature(std::string("b") + '\x1f' + "a", dim);
      expect_ba[idx] += sign;
    }
    CHECK(ab.vector == expect_ab);
    CHECK(ba.vector == expect_ba);

    auto [ab_idx, ab_sign] = hashed_feature(std::string("a") + '\x1f' + "b", dim);
    auto [ba_idx, ba_sign] = hashed_feature(std::string("b") + '\x1f' + "a", dim);
    for (size_t i = 0; i < dim; ++i) {
      if (i != ab_idx && i != ba_idx) CHECK(ab.vector[i] == ba.vector[i]);
    }
  }

  SUBCASE("dim below 2 rejected") { CHECK_THROWS_AS(embed("x", 1), ContractError); }
}

TEST_CASE("cosine") {
  SUBCASE("identity") {
    auto u = embed("alpha beta gamma", 256);
    auto c = cosine(u, u);
    REQUIRE(c.has_value());
    CHECK(*c == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("disjoint non-colliding tokens are orthogonal") {
    const size_t dim = 1024;
    auto u = embed("river", dim);
    auto v = embed("stone", dim);
    auto [iu, su] = hashed_feature("river", dim);
    auto [iv, sv] = hashed_feature("stone", dim);
    REQUIRE(iu != iv);  // chosen not to collide at this dim
    auto c = cosine(u, v);
    REQUIRE(c.has_value());
    CHECK(*c == doctest::Approx(0.0));
  }

  SUBCASE("hand-built vectors: 1/sqrt(2)") {
    HashedEmbedding u{2, {1.0, 0.0}};
    HashedEmbedding v{2, {1.0, 1.0}};
    auto c = cosine(u, v);
    REQUIRE(c.has_value());
    CHECK(*c == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  }

  SUBCASE("zero norm is undefined") {
    HashedEmbedding u{2, {0.0, 0.0}};
    HashedEmbedding v{2, {1.0, 0.0}};
    CHECK_FALSE(cosine(u, v).has_value());
  }

  SUBCASE("dimension mismatch is a contract violation") {
    HashedEmbedding u{2, {1.0, 0.0}};
    HashedEmbedding v{3, {1.0, 0.0, 0.0}};
    CHECK_THROWS_AS(cosine(u, v), ContractError);
  }

  SUBCASE("symmetry over random vectors") {
    testing::Rng rng(11);
    for (int iter = 0; iter < 50; ++iter) {
      auto u = embed(testing::random_sentence(rng, 1 + rng.below(10)), 128);
      auto v = embed(testing::random_sentence(rng, 1 + rng.below(10)), 128);
      auto a = cosine(u, v);
      auto b = cosine(v, u);
      REQUIRE(a.has_value() == b.has_value());
      if (a) CHECK(*a == doctest::Approx(*b).epsilon(1e-12));
    }
  }
}

TEST_CASE("semantic branch") {
  BranchThresholds thresholds;

  SUBCASE("identical texts align") {
    Prompt p{"id", "the cat sat on the mat"};
    Response r{p.text};
    auto rec = run_semantic(p, r, thresholds, 1024);
    CHECK(rec.signals.at("similarity") == doctest::Approx(1.0));
    CHECK(rec.text == "semantic similarity 1.0000; aligned");
  }

  SUBCASE("disjoint vocabulary misaligns") {
    Prompt p{"id", "river stone cloud"};
    Response r{"lantern meadow copper"};
    auto rec = run_semantic(p, r, thresholds, 1024);
    CHECK(rec.signals.at("similarity") == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(rec.text.find("misaligned") != std::string::npos);
  }

  SUBCASE("caffeine fixture matches a brute-force cosine") {
    auto ex = testing::caffeine_example();
    const size_t dim = 1024;
    auto rec = run_semantic(ex.prompt, Response{ex.chosen.text}, thresholds, dim);

    // oracle: rebuild both vectors with the pinned hash and compute the
    // cosine by direct summation
    auto brute = [&](const std::string& text) {
      std::vector<double> v(dim, 0.0);
      auto tokens = tokenize(text);
      for (const auto& t : tokens) {
        auto [idx, sign] = hashed_feature(t, dim);
        v[idx] += sign;
      }
      for (size_t i = 0; i + 1 < tokens.size(); ++i) {
        auto [idx, sign] = hashed_feature(tokens[i] + '\x1f' + tokens[i + 1], dim);
        v[idx] += sign;
      }
      return v;
    };
    auto vp = brute(ex.prompt.text);
    auto vr = brute(ex.chosen.text);
    double dot = 0, np = 0, nr = 0;
    for (size_t i = 0; i < dim; ++i) {
      dot += vp[i] * vr[i];
      np += vp[i] * vp[i];
      nr += vr[i] * vr[i];
    }
    double expected = dot / (std::sqrt(np) * std::sqrt(nr));
    CHECK(rec.signals.at("similarity") == doctest::Approx(expected).epsilon(1e-12));
    const char* label = expected >= 0.5 ? "aligned" : expected >= 0.2 ? "weakly aligned" : "misaligned";
    CHECK(rec.text.find(label) != std::string::npos);
  }
}

TEST_CASE("entity branch") {
  SUBCASE("no entities recognized") {
    KnowledgeGraph kg;
    auto rec = run_entity(Prompt{"id", "hello"}, Response{"world"}, kg);
    CHECK(rec.signals.at("entity_count") == 0.0);
    CHECK(rec.text == "no entities recognized");
  }

  SUBCASE("coffee fixture: one edge, fact_count 1") {
    auto res = caffeine_resources();
    auto rec = run_entity(Prompt{"id", "tell me about coffee"}, Response{"coffee is popular"},
                          res->kg);
    CHECK(rec.signals.at("entity_count") >= 1.0);
    auto ex = testing::caffeine_example();
    auto rec2 = run_entity(ex.prompt, Response{"Coffee has benefits."}, res->kg);
    CHECK(rec2.signals.at("entity_count") == 2.0);  // coffee + caffeine (in prompt)
    KnowledgeGraph coffee_only = KnowledgeGraph::from_json_text(R"({
      "entities": ["coffee"],
      "edges": [["coffee", "reduces-risk-of", "cardiovascular disease"]],
      "attributes": []
    })");
    auto rec3 = run_entity(Prompt{"id", "a drink"}, Response{"I like coffee"}, coffee_only);
    CHECK(rec3.signals.at("entity_count") == 1.0);
    CHECK(rec3.signals.at("fact_count") == 1.0);
    CHECK(rec3.text == "coffee [reduces-risk-of: cardiovascular disease]");
  }

  SUBCASE("two neighbors plus one attribute gives fact_count 3") {
    KnowledgeGraph kg = KnowledgeGraph::from_json_text(R"({
      "entities": ["graphene"],
      "edges": [["graphene", "conducts", "electricity"], ["graphene", "derived-from", "graphite"]],
      "attributes": [["graphene", "thickness", "one atom"]]
    })");
    auto rec = run_entity(Prompt{"id", "material"}, Response{"graphene fabric"}, kg);
    CHECK(rec.signals.at("fact_count") == 3.0);
  }

  SUBCASE("longest match wins over nested entities") {
    KnowledgeGraph kg = KnowledgeGraph::from_json_text(R"({
      "entities": ["power bank", "power"],
      "edges": [],
      "attributes": []
    })");
    auto rec = run_entity(Prompt{"id", "chargers"}, Response{"buy a power bank today"}, kg);
    CHECK(rec.signals.at("entity_count") == 1.0);
    CHECK(rec.text.find("power bank") != std::string::npos);
  }

  SUBCASE("detection is case-insensitive") {
    KnowledgeGraph kg = KnowledgeGraph::from_json_text(
        R"({"entities": ["coffee"], "edges": [], "attributes": []})");
    auto rec = run_entity(Prompt{"id", "drinks"}, Response{"COFFEE please"}, kg);
    CHECK(rec.signals.at("entity_count") == 1.0);
  }
}

TEST_CASE("factcheck branch") {
  SUBCASE("empty store is unverifiable") {
    ClaimStore store;
    auto rec = run_factcheck(Response{"anything"}, store);
    CHECK(rec.signals.at("matched") == 0.0);
    CHECK(rec.text.find("unverifiable") != std::string::npos);
  }

  SUBCASE("caffeine rejected response fails verification") {
    auto res = caffeine_resources();
    auto ex = testing::caffeine_example();
    auto rec = run_factcheck(ex.rejected, res->claims);
    CHECK(rec.signals.at("refuted_hits") == 1.0);
    CHECK(rec.text.find("verification failed") == 0);
  }

  SUBCASE("caffeine chosen response passes") {
    auto res = caffeine_resources();
    auto ex = testing::caffeine_example();
    auto rec = run_factcheck(ex.chosen, res->claims);
    CHECK(rec.signals.at("matched") == 1.0);
    CHECK(rec.signals.at("refuted_hits") == 0.0);
    CHECK(rec.text.find("verification passed") == 0);
  }

  SUBCASE("two true claims, one matched") {
    ClaimStore store = ClaimStore::from_json_text(R"([
      {"subject": "water", "predicate": "boils-at", "object": "100 degrees", "refuted": false},
      {"subject": "iron", "predicate": "melts-at", "object": "1538 degrees", "refuted": false}
    ])");
    auto rec = run_factcheck(Response{"water boils at 100 degrees at sea level"}, store);
    CHECK(rec.signals.at("matched") == 1.0);
    CHECK(rec.text.find("verification passed") == 0);
  }
}

TEST_CASE("style branch") {
  BranchThresholds thresholds;
  FormalLexicon lexicon({"furthermore", "consequently", "methodology", "demonstrates",
                         "substantial", "analysis"});

  SUBCASE("identical texts match") {
    Prompt p{"id", "This is a plain sentence."};
    auto rec = run_style(p, Response{p.text}, lexicon, thresholds);
    CHECK(rec.signals.at("match") == 1.0);
    CHECK(rec.signals.at("prompt_len") == rec.signals.at("resp_len"));
  }

  SUBCASE("empty lexicon labels everything casual") {
    FormalLexicon empty;
    auto rec = run_style(Prompt{"id", "Furthermore, the methodology demonstrates."},
                         Response{"yeah it works"}, empty, thresholds);
    CHECK(rec.signals.at("match") == 1.0);
    CHECK(rec.text.find("casual, response casual") != std::string::npos);
  }

  SUBCASE("formal prompt vs casual response mismatch") {
    // prompt: 2 of 6 tokens in the lexicon (ratio 0.333 >= 0.05 -> formal);
    // response: 0 of 6 (0.0 < 0.05 -> casual)
    Prompt p{"id", "Furthermore the analysis demonstrates clear gains."};
    Response r{"yeah i guess it works fine"};
    auto rec = run_style(p, r, lexicon, thresholds);
    CHECK(rec.signals.at("match") == 0.0);
    CHECK(rec.text == "style prompt formal, response casual; styles differ");
  }

  SUBCASE("mean sentence length") {
    auto rec = run_style(Prompt{"id", "One two three. Four five."}, Response{"Six."},
                         FormalLexicon{}, thresholds);
    CHECK(rec.signals.at("prompt_len") == doctest::Approx(2.5));
    CHECK(rec.signals.at("resp_len") == doctest::Approx(1.0));
  }
}

TEST_CASE("quality branch") {
  BranchThresholds thresholds;

  SUBCASE("single word boundary values") {
    auto rec = run_quality(Response{"hello"}, thresholds);
    CHECK(rec.signals.at("distinct1") == 1.0);
    CHECK(rec.signals.at("distinct2") == 0.0);
    CHECK(rec.signals.at("rep3") == 0.0);
  }

  SUBCASE("repeated word: distinct1 = 1/4") {
    auto rec = run_quality(Response{"a a a a"}, thresholds);
    CHECK(rec.signals.at("distinct1") == doctest::Approx(0.25));
    CHECK(rec.text.find("repetitive") != std::string::npos);
  }

  SUBCASE("all-unique sentence is varied") {
    auto rec = run_quality(Response{"one two three four five six seven eight nine ten"},
                           thresholds);
    CHECK(rec.signals.at("rep3") == 0.0);
    CHECK(rec.text.find("varied") != std::string::npos);
  }
}

TEST_CASE("candidate variants") {
  CHECK(candidate_variant("base text", 0) == "base text");
  CHECK(candidate_variant("base text", 1) == "base text");
  std::set<std::string> texts;
  for (uint64_t seed = 1; seed <= 8; ++seed) texts.insert(candidate_variant("base text", seed));
  CHECK(texts.size() == 8);
}

TEST_CASE("fan_out") {
  auto res = caffeine_resources();

  SUBCASE("single builtin branch equals the direct call") {
    BranchSpec spec;
    spec.kind = BranchKind::Quality;
    spec.backend = BuiltinBackend{res};
    BranchRegistry registry({spec}, 4);
    Prompt p{"id", "prompt text"};
    Response r{"some response words"};
    auto result = fan_out(registry, p, r);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0] == run_quality(r, res->thresholds));
    REQUIRE(result.latency.branches.size() == 1);
    CHECK(result.latency.branches[0].wall_ms >= 0.0);
    CHECK(result.latency.total_wall_ms >= result.latency.branches[0].wall_ms);
  }

  SUBCASE("empty registry is a configuration error") {
    BranchRegistry registry({}, 4);
    CHECK_THROWS_AS(fan_out(registry, Prompt{"id", "p"}, Response{"r"}), ContractError);
  }

  SUBCASE("duplicate kinds are rejected at construction") {
    std::vector<BranchSpec> specs{scripted_spec(BranchKind::Quality, 0, "a"),
                                  scripted_spec(BranchKind::Quality, 0, "b")};
    CHECK_THROWS_AS(BranchRegistry(std::move(specs), 2), ContractError);
  }

  SUBCASE("parallel wall time beats the serial sum") {
    const int latency_ms = 40;
    std::vector<BranchSpec> specs;
    for (BranchKind k : kAllBranchKinds)
      specs.push_back(scripted_spec(k, latency_ms, "branch " + to_string(k)));
    BranchRegistry registry(std::move(specs), 8);
    Prompt p{"id", "p"};
    Response r{"r"};

    auto par = fan_out(registry, p, r);
    // slack budget: half the simulated latency
    CHECK(par.latency.total_wall_ms <= 1.5 * latency_ms);

    auto seq = run_sequential(registry, p, r);
    CHECK(seq.latency.total_wall_ms >= 5.0 * latency_ms);
    CHECK(seq.records == par.records);
  }

  SUBCASE("order invariance: insertion order never changes output order") {
    std::vector<BranchSpec> forward, backward;
    for (BranchKind k : kAllBranchKinds) forward.push_back(scripted_spec(k, 0, to_string(k)));
    for (auto it = forward.rbegin(); it != forward.rend(); ++it) backward.push_back(*it);
    BranchRegistry a(std::move(forward), 4);
    BranchRegistry b(std::move(backward), 4);
    Prompt p{"id", "p"};
    Response r{"r"};
    auto ra = fan_out(a, p, r);
    auto rb = fan_out(b, p, r);
    CHECK(ra.records == rb.records);
    for (size_t i = 1; i < ra.records.size(); ++i)
      CHECK(ordinal(ra.records[i - 1].kind) < ordinal(ra.records[i].kind));
  }

  SUBCASE("timeout degrades only the slow branch") {
    BranchSpec slow = scripted_spec(BranchKind::Semantic, 50, "slow");
    slow.timeout = std::chrono::milliseconds(10);
    BranchSpec fast = scripted_spec(BranchKind::Quality, 0, "fast");
    BranchRegistry registry({slow, fast}, 4);
    auto result = fan_out(registry, Prompt{"id", "p"}, Response{"r"});
    REQUIRE(result.records.size() == 2);
    CHECK(result.records[0].signals.count("timeout") == 1);
    CHECK(result.records[0].text == "branch unavailable");
    CHECK(result.records[1].text == "fast");
    CHECK(result.latency.branches[0].timed_out);
    CHECK_FALSE(result.latency.branches[1].timed_out);
  }

  SUBCASE("builtin fan_out is deterministic") {
    std::vector<BranchSpec> specs;
    for (BranchKind k : kAllBranchKinds) {
      BranchSpec spec;
      spec.kind = k;
      spec.backend = BuiltinBackend{res};
      specs.push_back(std::move(spec));
    }
    BranchRegistry registry(std::move(specs), 2);
    auto ex = testing::caffeine_example();
    auto a = fan_out(registry, ex.prompt, ex.chosen);
    auto b = fan_out(registry, ex.prompt, ex.chosen);
    CHECK(a.records == b.records);
  }
}

TEST_CASE("remote branch protocol") {
  httplib::Server server;
  server.Post("/v1/branch", [](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    if (body.at("prompt").get<std::string>() == "slow")
      std::this_thread::sleep_for(std::chrono::milliseconds(80));
    if (body.at("prompt").get<std::string>() == "garbage") {
      res.set_content("{not json", "application/json");
      return;
    }
    nlohmann::json out{{"kind", body.at("kind")},
                       {"signals", {{"remote_score", 0.5}, {"seed_echo", body.at("seed")}}},
                       {"text", "remote text"}};
    res.set_content(out.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  EndpointDescriptor endpoint{"127.0.0.1", port, "/v1/branch"};

  SUBCASE("echo stub returns the record") {
    auto rec = call_remote(endpoint, BranchKind::Entity, Prompt{"id", "hello"}, Response{"r"},
                           std::chrono::milliseconds(2000), 3);
    CHECK(rec.kind == BranchKind::Entity);
    CHECK(rec.text == "remote text");
    CHECK(rec.signals.at("remote_score") == 0.5);
    CHECK(rec.signals.at("seed_echo") == 3.0);
  }

  SUBCASE("malformed body is a protocol error") {
    CHECK_THROWS_AS(call_remote(endpoint, BranchKind::Entity, Prompt{"id", "garbage"},
                                Response{"r"}, std::chrono::milliseconds(2000)),
                    ProtocolError);
  }

  SUBCASE("delay past the timeout degrades with a timeout signal") {
    auto rec = call_remote(endpoint, BranchKind::Entity, Prompt{"id", "slow"}, Response{"r"},
                           std::chrono::milliseconds(20));
    CHECK(rec.signals.count("timeout") == 1);
    CHECK(rec.text == "branch unavailable");
  }

  SUBCASE("unreachable endpoint degrades with an error signal") {
    EndpointDescriptor dead{"127.0.0.1", 1, "/v1/branch"};
    auto rec = call_remote(dead, BranchKind::Entity, Prompt{"id", "p"}, Response{"r"},
                           std::chrono::milliseconds(500));
    CHECK((rec.signals.count("error") == 1 || rec.signals.count("timeout") == 1));
    CHECK(rec.text == "branch unavailable");
  }

  server.stop();
  server_thread.join();
}
