#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace srm {

/// Dense signed-hash bag-of-ngrams vector. `dim` is fixed per configuration.
struct HashedEmbedding {
  size_t dim = 0;
  std::vector<double> vector;
};

/// FNV-1a 64-bit with a seed mixed into the offset basis. Pinned so hashed
/// feature indices are identical across platforms and builds.
uint64_t fnv1a64(std::string_view data, uint64_t seed = 0);

/// (index, sign) for one feature key: index = h1 mod dim, sign from the low
/// bit of an independently salted second hash.
std::pair<size_t, double> hashed_feature(std::string_view key, size_t dim, uint64_t seed = 0);

/// Hashed bag of lowercased word unigrams and bigrams. Counts accumulate
/// with +/-1 signs; empty text yields the zero vector. dim must be >= 2.
HashedEmbedding embed(std::string_view text, size_t dim, uint64_t seed = 0);

/// u.v / (|u||v|); nullopt when either norm is zero. Dimension mismatch is
/// a contract violation.
std::optional<double> cosine(const HashedEmbedding& u, const HashedEmbedding& v);

}  // namespace srm
