#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "srm/branch/builtin.hpp"
#include "srm/core/types.hpp"
#include "srm/lm/ngram.hpp"

namespace srm {

struct EndpointDescriptor {
  std::string host = "127.0.0.1";
  int port = 0;
  std::string path = "/v1/branch";
};

/// Deterministic branch functions over shared immutable resources.
struct BuiltinBackend {
  std::shared_ptr<const BuiltinResources> resources;
};

/// Lookup table keyed by the (prompt, response) text hash, with an optional
/// fallback record and a simulated latency used by the benchmarks.
struct ScriptedBackend {
  std::unordered_map<uint64_t, AuxiliaryRecord> table;
  std::optional<AuxiliaryRecord> fallback;
  std::chrono::milliseconds delay{0};

  static uint64_t key(const Prompt& p, const Response& r);
};

struct RemoteBackend {
  EndpointDescriptor endpoint;
};

/// A trained n-gram branch model decoding auxiliary text from (p, r).
struct TrainedBackend {
  std::shared_ptr<const NgramLM> lm;
  size_t max_tokens = 32;
};

using BranchBackend = std::variant<BuiltinBackend, ScriptedBackend, RemoteBackend, TrainedBackend>;

struct BranchSpec {
  BranchKind kind = BranchKind::Semantic;
  BranchBackend backend;
  std::chrono::milliseconds timeout{1000};
};

/// Immutable ordered set of branch specs, at most one per kind.
class BranchRegistry {
 public:
  BranchRegistry(std::vector<BranchSpec> specs, int concurrency_limit);

  const std::vector<BranchSpec>& specs() const { return specs_; }
  int concurrency_limit() const { return concurrency_limit_; }
  const BranchSpec* find(BranchKind kind) const;

 private:
  std::vector<BranchSpec> specs_;
  int concurrency_limit_;
};

/// Runs one branch synchronously. `seed` 0 is the canonical rendering;
/// nonzero seeds produce best-of-N candidate variants (builtin/scripted
/// decorate the template, trained models sample, remote passes the seed).
AuxiliaryRecord generate_record(const BranchSpec& spec, const Prompt& p, const Response& r,
                                uint64_t seed = 0);

/// Degraded stand-in used when a branch times out or fails.
AuxiliaryRecord degraded_record(BranchKind kind, bool timed_out);

}  // namespace srm
