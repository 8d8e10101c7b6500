#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "srm/core/types.hpp"

namespace srm {

/// Parse failure with the 1-based line number of the offending record.
class ParseError : public std::runtime_error {
 public:
  ParseError(size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Segment separator token for flattened enhanced inputs:
/// "\n[SEG:<label>]\n" with label PROMPT, RESPONSE or SB:<KIND>.
std::string segment_separator(const std::string& label);
std::string branch_segment_label(BranchKind kind);

/// Escapes "[SEG:" occurrences so segment text can never fake a separator.
std::string escape_segment(std::string_view text);

/// Flattens prompt, response and the present auxiliaries (ordinal order)
/// with one separator between consecutive segments.
std::string canonical_concat(const EnhancedInput& x);

/// Writes one JSON object per line ({id, prompt, chosen, rejected}).
/// Returns the record count. Throws IoError with the failing record index.
size_t serialize_dataset(const std::vector<PreferenceExample>& examples, std::ostream& sink);

/// Inverse of serialize_dataset. Blank lines are skipped. Malformed JSON,
/// missing fields or invariant violations raise ParseError with the line.
std::vector<PreferenceExample> parse_dataset(std::istream& source);

/// Curation JSONL: {id, prompt, response, auxiliary:{kind, signals, text},
/// judge_score (number or null)}.
size_t serialize_curation(const std::vector<CandidateTriple>& candidates, std::ostream& sink);
std::vector<CandidateTriple> parse_curation(std::istream& source);

std::vector<PreferenceExample> load_dataset_file(const std::string& path);
void save_dataset_file(const std::vector<PreferenceExample>& examples, const std::string& path);
void save_curation_file(const std::vector<CandidateTriple>& candidates, const std::string& path);
std::vector<CandidateTriple> load_curation_file(const std::string& path);

}  // namespace srm
