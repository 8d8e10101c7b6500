#include "srm/eval/bench.hpp"

#include <algorithm>
#include <chrono>

namespace srm {

using nlohmann::json;

const std::string& to_string(BenchMode mode) {
  static const std::string seq = "sequential";
  static const std::string par = "parallel";
  return mode == BenchMode::Sequential ? seq : par;
}

nlohmann::json BenchResult::to_json() const {
  json doc{{"schema_version", 1},
           {"mode", to_string(mode)},
           {"samples", samples},
           {"repetitions", repetitions},
           {"wall_ms", wall_ms},
           {"per_1000_s", per_1000_s}};
  doc["speedup"] = speedup ? json(*speedup) : json(nullptr);
  return doc;
}

nlohmann::json BenchComparison::to_json() const {
  return json{{"schema_version", 1},
              {"sequential", sequential.to_json()},
              {"parallel", parallel.to_json()},
              {"speedup", sequential.wall_ms / parallel.wall_ms}};
}

BenchResult bench(const BranchRegistry& registry,
                  const std::vector<std::pair<Prompt, Response>>& pairs, BenchMode mode,
                  size_t repetitions) {
  if (repetitions < 3) throw ContractError("bench requires at least 3 repetitions");
  if (pairs.empty()) throw ContractError("bench requires a non-empty workload");

  std::vector<double> runs;
  runs.reserve(repetitions);
  for (size_t rep = 0; rep < repetitions; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& [p, r] : pairs) {
      if (mode == BenchMode::Parallel) {
        fan_out(registry, p, r);
      } else {
        run_sequential(registry, p, r);
      }
    }
    runs.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count());
  }
  std::sort(runs.begin(), runs.end());
  const double median = runs[runs.size() / 2];

  BenchResult result;
  result.mode = mode;
  result.samples = pairs.size();
  result.repetitions = repetitions;
  result.wall_ms = median;
  result.per_1000_s = median / 1000.0 * (1000.0 / static_cast<double>(pairs.size()));
  return result;
}

BenchComparison bench_compare(const BranchRegistry& registry,
                              const std::vector<std::pair<Prompt, Response>>& pairs,
                              size_t repetitions) {
  BenchComparison cmp;
  cmp.sequential = bench(registry, pairs, BenchMode::Sequential, repetitions);
  cmp.parallel = bench(registry, pairs, BenchMode::Parallel, repetitions);
  const double speedup = cmp.sequential.wall_ms / cmp.parallel.wall_ms;
  cmp.sequential.speedup = speedup;
  cmp.parallel.speedup = speedup;
  return cmp;
}

}  // namespace srm
