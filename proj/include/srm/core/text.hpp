#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace srm {

/// Word tokenizer used everywhere text is reduced to tokens: lowercase
/// (ASCII range only), split on Unicode whitespace, strip leading and
/// trailing ASCII punctuation from each token. Deterministic.
std::vector<std::string> tokenize(std::string_view text);

/// Splits on '.', '!' and '?' runs; returns non-empty sentence substrings.
std::vector<std::string> split_sentences(std::string_view text);

/// |unique unigrams| / |unigrams|; 0 for empty input.
double distinct1(const std::vector<std::string>& tokens);

/// |unique bigrams| / max(1, |bigrams|).
double distinct2(const std::vector<std::string>& tokens);

/// Fraction of trigram occurrences whose trigram appears at least twice.
double repeated_trigram_fraction(const std::vector<std::string>& tokens);

/// Word-level Jaccard overlap of the two token sets; 0 when both are empty.
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Case-insensitive substring search (ASCII folding).
bool contains_ci(std::string_view haystack, std::string_view needle);

std::string to_lower_ascii(std::string_view s);

}  // namespace srm
