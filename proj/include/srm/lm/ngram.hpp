#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "srm/core/types.hpp"

namespace srm {

/// Additively smoothed conditional n-gram language model. Maximum-likelihood
/// counting over streams tokenize(p) + tokenize(r) + BOS + tokenize(a) + EOS,
/// so auxiliary text is scored conditionally on its (prompt, response) pair.
///
/// P(w | ctx) = (count(ctx, w) + alpha) / (count(ctx) + alpha * |V|).
class NgramLM {
 public:
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";
  static constexpr const char* kUnk = "<unk>";

  NgramLM() = default;
  NgramLM(int order, double alpha);

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  const std::set<std::string>& vocab() const { return vocab_; }
  bool trained() const { return !context_totals_.empty(); }

  /// Smoothed conditional probability; tokens outside the vocab are mapped
  /// to the UNK token on both sides.
  double probability(const std::vector<std::string>& context, const std::string& token) const;

  /// Mean negative log-likelihood per token of `auxiliary` conditioned on
  /// (p, r). Finite for every input since alpha > 0.
  double mean_nll(const Prompt& p, const Response& r, const std::string& auxiliary) const;

  enum class Decoding { Greedy, Sampled };

  /// Decodes up to max_tokens continuation tokens from the (p, r) context.
  /// Greedy takes the argmax with lexicographic tie-break; Sampled draws by
  /// inverse CDF from a pinned 64-bit generator. Stops at EOS. BOS and UNK
  /// are never emitted.
  std::string generate(const std::vector<std::string>& context_tokens, size_t max_tokens,
                       uint64_t seed = 0, Decoding mode = Decoding::Greedy) const;

  std::string to_json() const;
  static NgramLM from_json(const std::string& text);
  void save(const std::string& path) const;
  static NgramLM load(const std::string& path);

  bool operator==(const NgramLM& other) const;

  /// Counting pass over one (p, r, a) triple.
  void observe(const Prompt& p, const Response& r, const std::string& auxiliary);

 private:
  std::vector<std::string> stream_tokens(const Prompt& p, const Response& r,
                                         const std::string& auxiliary) const;
  std::string context_key(const std::vector<std::string>& context) const;
  std::string map_to_vocab(const std::string& token) const;

  int order_ = 3;
  double alpha_ = 0.1;
  std::set<std::string> vocab_;
  // context key (tokens joined with \x1f) -> token -> count
  std::map<std::string, std::map<std::string, uint64_t>> counts_;
  std::map<std::string, uint64_t> context_totals_;
};

/// Trains by counting all n-grams of every triple's token stream; the
/// count-ratio estimate minimizes the corpus negative log-likelihood within
/// the n-gram family.
NgramLM train_lm(const std::vector<std::tuple<Prompt, Response, std::string>>& triples,
                 int order, double alpha);

/// Conditioning tokens for generation: tokenize(p) + tokenize(r).
std::vector<std::string> conditioning_tokens(const Prompt& p, const Response& r);

}  // namespace srm
