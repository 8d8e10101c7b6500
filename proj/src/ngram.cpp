#include "srm/lm/ngram.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "srm/core/jsonl.hpp"
#include "srm/core/text.hpp"

namespace srm {

using nlohmann::json;

namespace {
constexpr char kJoin = '\x1f';

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string key;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) key.push_back(kJoin);
    key += tokens[i];
  }
  return key;
}
}  // namespace

NgramLM::NgramLM(int order, double alpha) : order_(order), alpha_(alpha) {
  if (order < 1) throw ContractError("n-gram order must be >= 1");
  if (alpha <= 0.0) throw ContractError("smoothing alpha must be > 0");
  vocab_ = {kBos, kEos, kUnk};
}

std::vector<std::string> NgramLM::stream_tokens(const Prompt& p, const Response& r,
                                                const std::string& auxiliary) const {
  std::vector<std::string> stream = tokenize(p.text);
  for (auto& t : tokenize(r.text)) stream.push_back(std::move(t));
  stream.emplace_back(kBos);
  for (auto& t : tokenize(auxiliary)) stream.push_back(std::move(t));
  stream.emplace_back(kEos);
  return stream;
}

std::string NgramLM::context_key(const std::vector<std::string>& context) const {
  return join_tokens(context);
}

std::string NgramLM::map_to_vocab(const std::string& token) const {
  return vocab_.count(token) ? token : std::string(kUnk);
}

void NgramLM::observe(const Prompt& p, const Response& r, const std::string& auxiliary) {
  std::vector<std::string> stream = stream_tokens(p, r, auxiliary);
  for (const auto& t : stream) vocab_.insert(t);
  const size_t ctx_len = static_cast<size_t>(order_ - 1);
  if (stream.size() < static_cast<size_t>(order_)) return;
  for (size_t i = 0; i + ctx_len < stream.size(); ++i) {
    std::vector<std::string> context(stream.begin() + i, stream.begin() + i + ctx_len);
    const std::string& target = stream[i + ctx_len];
    std::string key = context_key(context);
    ++counts_[key][target];
    ++context_totals_[key];
  }
}

NgramLM train_lm(const std::vector<std::tuple<Prompt, Response, std::string>>& triples,
                 int order, double alpha) {
  if (triples.empty()) throw ContractError("training requires at least one triple");
  NgramLM lm(order, alpha);
  for (const auto& [p, r, a] : triples) {
    if (!has_visible_text(a)) throw ContractError("auxiliary text is empty (prompt id " + p.id + ")");
    lm.observe(p, r, a);
  }
  return lm;
}

double NgramLM::probability(const std::vector<std::string>& context,
                            const std::string& token) const {
  if (context.size() != static_cast<size_t>(order_ - 1))
    throw ContractError("context length must be order-1");
  std::vector<std::string> mapped;
  mapped.reserve(context.size());
  for (const auto& t : context) mapped.push_back(map_to_vocab(t));
  std::string key = context_key(mapped);
  std::string w = map_to_vocab(token);

  uint64_t pair_count = 0;
  uint64_t total = 0;
  if (auto it = context_totals_.find(key); it != context_totals_.end()) {
    total = it->second;
    const auto& dist = counts_.at(key);
    if (auto jt = dist.find(w); jt != dist.end()) pair_count = jt->second;
  }
  double v = static_cast<double>(vocab_.size());
  return (static_cast<double>(pair_count) + alpha_) / (static_cast<double>(total) + alpha_ * v);
}

double NgramLM::mean_nll(const Prompt& p, const Response& r, const std::string& auxiliary) const {
  std::vector<std::string> targets = tokenize(auxiliary);
  if (targets.empty()) return 0.0;
  std::vector<std::string> prefix = conditioning_tokens(p, r);
  prefix.emplace_back(kBos);

  const size_t ctx_len = static_cast<size_t>(order_ - 1);
  std::vector<std::string> window;
  for (const auto& t : prefix) window.push_back(map_to_vocab(t));
  // Left-pad short conditioning streams so the first target has a full context.
  while (window.size() < ctx_len) window.insert(window.begin(), kBos);

  double total = 0.0;
  for (const auto& target : targets) {
    std::vector<std::string> context(window.end() - ctx_len, window.end());
    total += -std::log(probability(context, target));
    window.push_back(map_to_vocab(target));
  }
  return total / static_cast<double>(targets.size());
}

std::string NgramLM::generate(const std::vector<std::string>& context_tokens, size_t max_tokens,
                              uint64_t seed, Decoding mode) const {
  if (max_tokens < 1) throw ContractError("max_tokens must be >= 1");
  if (!trained()) throw ContractError("generate requires a trained model");

  const size_t ctx_len = static_cast<size_t>(order_ - 1);
  std::vector<std::string> window;
  for (const auto& t : context_tokens) window.push_back(map_to_vocab(t));
  window.emplace_back(kBos);
  while (window.size() < ctx_len) window.insert(window.begin(), kBos);

  // Emittable tokens, sorted; BOS/UNK are structural and never produced.
  std::vector<std::string> candidates;
  candidates.reserve(vocab_.size());
  for (const auto& t : vocab_)
    if (t != kBos && t != kUnk) candidates.push_back(t);

  uint64_t rng_state = seed * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL;
  auto next_uniform = [&rng_state]() {
    // xorshift64*, pinned across platforms
    rng_state ^= rng_state >> 12;
    rng_state ^= rng_state << 25;
    rng_state ^= rng_state >> 27;
    uint64_t z = rng_state * 0x2545F4914F6CDD1DULL;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  };

  std::vector<std::string> emitted;
  for (size_t step = 0; step < max_tokens; ++step) {
    std::vector<std::string> context(window.end() - ctx_len, window.end());
    std::string chosen;
    if (mode == Decoding::Greedy) {
      double best = -1.0;
      for (const auto& t : candidates) {
        double prob = probability(context, t);
        if (prob > best) {
          best = prob;
          chosen = t;
        }
      }
    } else {
      double mass = 0.0;
      for (const auto& t : candidates) mass += probability(context, t);
      double u = next_uniform() * mass;
      double acc = 0.0;
      chosen = candidates.back();
      for (const auto& t : candidates) {
        acc += probability(context, t);
        if (u < acc) {
          chosen = t;
          break;
        }
      }
    }
    if (chosen == kEos) break;
    emitted.push_back(chosen);
    window.push_back(chosen);
  }

  std::string out;
  for (size_t i = 0; i < emitted.size(); ++i) {
    if (i) out.push_back(' ');
    out += emitted[i];
  }
  return out;
}

std::string NgramLM::to_json() const {
  json counts = json::object();
  for (const auto& [ctx, dist] : counts_) {
    json inner = json::object();
    for (const auto& [token, count] : dist) inner[token] = count;
    counts[ctx] = std::move(inner);
  }
  json doc{{"n", order_},
           {"alpha", alpha_},
           {"vocab", std::vector<std::string>(vocab_.begin(), vocab_.end())},
           {"counts", std::move(counts)}};
  return doc.dump(2);
}

NgramLM NgramLM::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("n-gram model JSON: ") + e.what());
  }
  NgramLM lm(doc.at("n").get<int>(), doc.at("alpha").get<double>());
  for (const auto& t : doc.at("vocab")) lm.vocab_.insert(t.get<std::string>());
  for (const auto& [ctx, dist] : doc.at("counts").items()) {
    for (const auto& [token, count] : dist.items()) {
      uint64_t c = count.get<uint64_t>();
      lm.counts_[ctx][token] = c;
      lm.context_totals_[ctx] += c;
    }
  }
  return lm;
}

void NgramLM::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out << to_json() << '\n';
}

NgramLM NgramLM::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

bool NgramLM::operator==(const NgramLM& other) const {
  return order_ == other.order_ && alpha_ == other.alpha_ && vocab_ == other.vocab_ &&
         counts_ == other.counts_;
}

std::vector<std::string> conditioning_tokens(const Prompt& p, const Response& r) {
  std::vector<std::string> tokens = tokenize(p.text);
  for (auto& t : tokenize(r.text)) tokens.push_back(std::move(t));
  return tokens;
}

}  // namespace srm
