#include "srm/branch/embedding.hpp"

#include <cmath>

#include "srm/core/text.hpp"
#include "srm/core/types.hpp"

namespace srm {

namespace {
constexpr uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;
constexpr uint64_t kSeedMix = 0x9E3779B97F4A7C15ULL;
constexpr uint64_t kSignSalt = 0xA24BAED4963EE407ULL;
}  // namespace

uint64_t fnv1a64(std::string_view data, uint64_t seed) {
  uint64_t h = kFnvOffset ^ (seed * kSeedMix);
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::pair<size_t, double> hashed_feature(std::string_view key, size_t dim, uint64_t seed) {
  uint64_t h1 = fnv1a64(key, seed);
  uint64_t h2 = fnv1a64(key, seed ^ kSignSalt);
  size_t index = static_cast<size_t>(h1 % dim);
  double sign = (h2 & 1u) ? 1.0 : -1.0;
  return {index, sign};
}

HashedEmbedding embed(std::string_view text, size_t dim, uint64_t seed) {
  if (dim < 2) throw ContractError("embedding dim must be >= 2");
  HashedEmbedding e;
  e.dim = dim;
  e.vector.assign(dim, 0.0);
  const std::vector<std::string> tokens = tokenize(text);
  for (const auto& t : tokens) {
    auto [idx, sign] = hashed_feature(t, dim, seed);
    e.vector[idx] += sign;
  }
  for (size_t i = 0; i + 1 < tokens.size(); ++i) {
    std::string key = tokens[i] + '\x1f' + tokens[i + 1];
    auto [idx, sign] = hashed_feature(key, dim, seed);
    e.vector[idx] += sign;
  }
  return e;
}

std::optional<double> cosine(const HashedEmbedding& u, const HashedEmbedding& v) {
  if (u.dim != v.dim)
    throw ContractError("cosine dimension mismatch: " + std::to_string(u.dim) +
                        " vs " + std::to_string(v.dim));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.dim; ++i) {
    dot += u.vector[i] * v.vector[i];
    nu += u.vector[i] * u.vector[i];
    nv += v.vector[i] * v.vector[i];
  }
  if (nu == 0.0 || nv == 0.0) return std::nullopt;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace srm
