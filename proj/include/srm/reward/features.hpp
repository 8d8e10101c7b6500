#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "srm/core/types.hpp"

namespace srm {

/// Published scalar signal names per branch, in fixed coordinate order.
/// Each name owns one reserved trailing coordinate of that branch's block.
const std::vector<std::string>& signal_names(BranchKind kind);

/// Per-segment hashed-feature layout: one BASE block for the (prompt,
/// response) text, one block per branch (hashed text + reserved signal
/// coordinates).
struct FeatureConfig {
  size_t base_dim = 2048;
  size_t sb_text_dim = 512;
  uint64_t hash_seed = 17;

  size_t branch_block_dim(BranchKind kind) const;
  size_t total_dim() const;

  bool operator==(const FeatureConfig&) const = default;
};

struct FeatureGroup {
  std::string label;  // "BASE" or "SB:<kind>"
  size_t offset = 0;
  size_t dim = 0;
};

/// BASE first, then branch blocks in ordinal order.
std::vector<FeatureGroup> group_layout(const FeatureConfig& config);

struct FeatureVector {
  std::vector<double> values;
};

/// Branch kinds whose blocks are zeroed at featurization (inference
/// ablation).
using AblationMask = std::set<BranchKind>;

/// Deterministic featurization. Missing branches leave their block at zero;
/// numeric signals land on their reserved coordinates unhashed.
FeatureVector featurize(const EnhancedInput& x, const FeatureConfig& config,
                        const AblationMask& ablated = {});

}  // namespace srm
