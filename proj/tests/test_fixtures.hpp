#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srm/core/types.hpp"

namespace srm::testing {

// Case-study pair: factually sound chosen response vs a rejected response
// leaning on a retracted study.
inline PreferenceExample caffeine_example() {
  PreferenceExample ex;
  ex.prompt.id = "caffeine-1";
  ex.prompt.text = "Discuss the health effects of daily caffeine consumption.";
  ex.chosen.text =
      "Moderate caffeine intake (300-400mg/day) may enhance cognitive performance. "
      "Recent studies suggest potential cardiovascular benefits when consumed without "
      "added sugars (NIH, 2023).";
  ex.rejected.text =
      "Coffee causes heart disease and bone loss. A 1995 study proved caffeine "
      "directly weakens bones (Journal of Old Medicine).";
  return ex;
}

// splitmix64; keeps generated fixtures identical across platforms.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t n) { return next() % n; }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline std::string random_word(Rng& rng) {
  static const char* pool[] = {"river",  "stone",  "cloud",  "lantern", "meadow", "copper",
                               "harbor", "signal", "cedar",  "violet",  "ember",  "quartz",
                               "willow", "falcon", "summit", "prairie", "anchor", "marble",
                               "canyon", "beacon", "timber", "garnet",  "breeze", "tundra"};
  return pool[rng.below(sizeof(pool) / sizeof(pool[0]))];
}

inline std::string random_sentence(Rng& rng, size_t words) {
  std::string out;
  for (size_t i = 0; i < words; ++i) {
    if (i) out.push_back(' ');
    out += random_word(rng);
  }
  return out;
}

}  // namespace srm::testing
