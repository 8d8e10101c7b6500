#pragma once

#include <vector>

#include "srm/branch/backend.hpp"
#include "srm/core/types.hpp"

namespace srm {

struct BranchLatency {
  BranchKind kind = BranchKind::Semantic;
  double wall_ms = 0.0;
  bool timed_out = false;
  bool failed = false;
};

struct LatencyReport {
  std::vector<BranchLatency> branches;  // ordinal order, matching records
  double total_wall_ms = 0.0;
};

struct FanOutResult {
  std::vector<AuxiliaryRecord> records;  // ordinal order
  LatencyReport latency;
};

/// Scatter-gather over all registered branches. Branches run concurrently
/// up to the registry's concurrency limit; per-branch timeouts are measured
/// from call start and produce degraded records without failing the call.
/// Results are re-ordered by branch ordinal regardless of completion order.
FanOutResult fan_out(const BranchRegistry& registry, const Prompt& p, const Response& r);

/// Serial reference execution of the same workload (GRM-style), used by the
/// efficiency benchmark. Produces the same records; timeouts not enforced.
FanOutResult run_sequential(const BranchRegistry& registry, const Prompt& p, const Response& r);

/// Convenience: fan_out records assembled into an EnhancedInput.
EnhancedInput enhance(const BranchRegistry& registry, const Prompt& p, const Response& r);

}  // namespace srm
