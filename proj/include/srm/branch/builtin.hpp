#pragma once

#include <memory>
#include <set>
#include <string>

#include "srm/branch/knowledge.hpp"
#include "srm/core/types.hpp"

namespace srm {

/// Labeling thresholds for the builtin branches. Config-overridable.
struct BranchThresholds {
  double similarity_aligned = 0.5;  // cosine >= this -> "aligned"
  double similarity_weak = 0.2;     // cosine >= this -> "weakly aligned"
  double formal_marker = 0.05;      // marker ratio >= this -> "formal"
  double repetition = 0.2;          // rep3 > this -> "repetitive"
};

/// Formal-marker word list; one lowercase word per line on disk.
class FormalLexicon {
 public:
  FormalLexicon() = default;
  explicit FormalLexicon(std::set<std::string> words) : words_(std::move(words)) {}

  bool contains(const std::string& word) const { return words_.count(word) > 0; }
  size_t size() const { return words_.size(); }

  static FormalLexicon from_file(const std::string& path);

 private:
  std::set<std::string> words_;
};

/// Shared immutable inputs for the builtin branches.
struct BuiltinResources {
  KnowledgeGraph kg;
  ClaimStore claims;
  FormalLexicon lexicon;
  BranchThresholds thresholds;
  size_t embed_dim = 1024;
};

AuxiliaryRecord run_semantic(const Prompt& p, const Response& r,
                             const BranchThresholds& thresholds, size_t embed_dim);
AuxiliaryRecord run_entity(const Prompt& p, const Response& r, const KnowledgeGraph& kg);
AuxiliaryRecord run_factcheck(const Response& r, const ClaimStore& store);
AuxiliaryRecord run_style(const Prompt& p, const Response& r, const FormalLexicon& lexicon,
                          const BranchThresholds& thresholds);
AuxiliaryRecord run_quality(const Response& r, const BranchThresholds& thresholds);

/// Dispatch by kind against shared resources.
AuxiliaryRecord run_builtin(BranchKind kind, const Prompt& p, const Response& r,
                            const BuiltinResources& resources);

/// Seed-varied rendering for best-of-N candidate sampling. Seed 0 keeps the
/// canonical text; distinct seeds always yield distinct texts.
std::string candidate_variant(const std::string& canonical_text, uint64_t seed);

/// Fixed-precision float rendering used by all canonical templates.
std::string format_signal(double v);

}  // namespace srm
