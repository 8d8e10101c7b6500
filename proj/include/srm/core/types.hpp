#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace srm {

/// Raised when a caller violates a documented contract (bad dimensions,
/// invalid field values, ...). Distinct from I/O and parse failures.
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

/// The five side-branch dimensions, in canonical ordinal order 1..5.
enum class BranchKind : int {
  Semantic = 1,
  Entity = 2,
  FactCheck = 3,
  Style = 4,
  Quality = 5,
};

inline constexpr int kBranchCount = 5;

inline constexpr BranchKind kAllBranchKinds[kBranchCount] = {
    BranchKind::Semantic, BranchKind::Entity, BranchKind::FactCheck,
    BranchKind::Style, BranchKind::Quality};

inline int ordinal(BranchKind k) { return static_cast<int>(k); }

const std::string& to_string(BranchKind k);

/// Parses a kind name ("semantic", "entity", ...); case-insensitive.
std::optional<BranchKind> branch_kind_from_string(const std::string& name);

/// Returns true if `text` contains at least one non-whitespace character.
bool has_visible_text(const std::string& text);

struct Prompt {
  std::string id;
  std::string text;
};

struct Response {
  std::string text;
};

struct PreferenceExample {
  Prompt prompt;
  Response chosen;
  Response rejected;
};

inline bool operator==(const Prompt& a, const Prompt& b) {
  return a.id == b.id && a.text == b.text;
}
inline bool operator==(const Response& a, const Response& b) {
  return a.text == b.text;
}
inline bool operator==(const PreferenceExample& a, const PreferenceExample& b) {
  return a.prompt == b.prompt && a.chosen == b.chosen && a.rejected == b.rejected;
}

/// Validates the documented invariants; throws ContractError on violation.
void validate(const Prompt& p);
void validate(const Response& r);
void validate(const PreferenceExample& ex);

/// One branch's structured output: named scalar signals plus the rendered
/// auxiliary text. Immutable once built.
struct AuxiliaryRecord {
  BranchKind kind = BranchKind::Semantic;
  std::map<std::string, double> signals;
  std::string text;
};

inline bool operator==(const AuxiliaryRecord& a, const AuxiliaryRecord& b) {
  return a.kind == b.kind && a.signals == b.signals && a.text == b.text;
}

/// (prompt, response) pair augmented with at most one auxiliary record per
/// branch kind, kept sorted by branch ordinal regardless of insertion order.
class EnhancedInput {
 public:
  EnhancedInput(Prompt prompt, Response response)
      : prompt_(std::move(prompt)), response_(std::move(response)) {}

  /// Inserts a record at its ordinal position. A second record for the same
  /// kind is a contract violation.
  void add_auxiliary(AuxiliaryRecord rec);

  const Prompt& prompt() const { return prompt_; }
  const Response& response() const { return response_; }
  const std::vector<AuxiliaryRecord>& auxiliaries() const { return auxiliaries_; }

  const AuxiliaryRecord* find(BranchKind kind) const;

 private:
  Prompt prompt_;
  Response response_;
  std::vector<AuxiliaryRecord> auxiliaries_;  // ascending ordinal
};

/// Unit of curation: a candidate auxiliary text awaiting or carrying a
/// judge score in [0,1].
struct CandidateTriple {
  Prompt prompt;
  Response response;
  AuxiliaryRecord auxiliary;
  std::optional<double> judge_score;
};

inline bool operator==(const CandidateTriple& a, const CandidateTriple& b) {
  return a.prompt == b.prompt && a.response == b.response &&
         a.auxiliary == b.auxiliary && a.judge_score == b.judge_score;
}

}  // namespace srm
