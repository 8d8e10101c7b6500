#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srm/branch/fanout.hpp"

namespace srm {

enum class BenchMode { Sequential, Parallel };

const std::string& to_string(BenchMode mode);

struct BenchResult {
  BenchMode mode = BenchMode::Parallel;
  size_t samples = 0;
  size_t repetitions = 0;
  double wall_ms = 0.0;        // median over repetitions
  double per_1000_s = 0.0;     // extrapolated seconds per 1,000 samples
  std::optional<double> speedup;  // sequential / parallel, when both measured

  nlohmann::json to_json() const;
};

/// Times the branch workload over `pairs` in one mode; median of
/// `repetitions` runs (at least 3). Sequential mode runs branches strictly
/// one after another, emulating serial generation.
BenchResult bench(const BranchRegistry& registry,
                  const std::vector<std::pair<Prompt, Response>>& pairs, BenchMode mode,
                  size_t repetitions);

struct BenchComparison {
  BenchResult sequential;
  BenchResult parallel;

  nlohmann::json to_json() const;
};

/// Runs both modes on identical workloads and fills in the speedup ratio.
BenchComparison bench_compare(const BranchRegistry& registry,
                              const std::vector<std::pair<Prompt, Response>>& pairs,
                              size_t repetitions);

}  // namespace srm
