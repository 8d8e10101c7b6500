#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "srm/branch/backend.hpp"
#include "srm/core/types.hpp"

namespace srm {

/// Deterministic desk-scale judge:
/// 0.5 * jaccard(a, r) + 0.3 * min(1, |a| / 200 bytes) + 0.2 * distinct1(a).
struct HeuristicJudge {};

/// Fixed score table keyed by the auxiliary text hash.
struct ScriptedJudge {
  std::unordered_map<uint64_t, double> table;
  std::optional<double> fallback;

  static uint64_t key(const std::string& auxiliary_text);
};

/// POST {prompt, response, auxiliary} -> {score in [0,1]}.
struct RemoteJudge {
  EndpointDescriptor endpoint;
  std::chrono::milliseconds timeout{2000};
};

using JudgeBackend = std::variant<HeuristicJudge, ScriptedJudge, RemoteJudge>;

struct JudgeSpec {
  JudgeBackend backend;
  double tau = 0.6;

  JudgeSpec(JudgeBackend b, double threshold) : backend(std::move(b)), tau(threshold) {
    if (tau < 0.0 || tau > 1.0) throw ContractError("judge threshold must be in [0,1]");
  }
};

struct CurationReport {
  size_t candidates_in = 0;
  size_t retained = 0;
  size_t rejected = 0;
  size_t unjudged = 0;  // subset of rejected
  // 10 equal-width score bins over [0,1]; unjudged candidates fall in bin 0
  // so the histogram always sums to candidates_in.
  std::array<size_t, 10> score_histogram{};

  nlohmann::json to_json() const;
};

/// Best-of-N sampling: M candidates per (prompt, response) pair, produced by
/// invoking the generator with variation seeds 1..M. A generator failure
/// degrades that candidate and the pipeline continues.
std::vector<CandidateTriple> sample_candidates(
    const std::vector<std::pair<Prompt, Response>>& pairs, const BranchSpec& generator,
    size_t m);

/// Scores one candidate. Remote judge failures leave the score absent.
CandidateTriple judge(CandidateTriple candidate, const JudgeSpec& spec);

/// Scores all candidates, preserving order; up to `concurrency` judge calls
/// run at once.
std::vector<CandidateTriple> judge_all(std::vector<CandidateTriple> candidates,
                                       const JudgeSpec& spec, int concurrency = 4);

/// Threshold filter: retained iff judge_score >= tau (boundary retained).
/// Unjudged candidates are always rejected.
std::pair<std::vector<CandidateTriple>, CurationReport> filter(
    const std::vector<CandidateTriple>& candidates, double tau);

/// sample -> judge -> filter.
std::pair<std::vector<CandidateTriple>, CurationReport> run_curation(
    const std::vector<std::pair<Prompt, Response>>& pairs, const BranchSpec& generator,
    const JudgeSpec& judge_spec, size_t m, int concurrency = 4);

}  // namespace srm
