#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srm/branch/fanout.hpp"
#include "srm/reward/train.hpp"

namespace srm {

struct EvalRecord {
  std::string id;
  double score_chosen = 0.0;
  double score_rejected = 0.0;
  bool correct = false;
};

struct EvalResult {
  size_t total = 0;
  size_t correct = 0;
  double accuracy = 0.0;  // ties count as incorrect
  std::vector<EvalRecord> records;

  nlohmann::json to_json() const;
};

/// Precomputed branch records for every example; lets evaluation, ablation
/// and retraining reuse one fan-out pass.
std::vector<TrainingExample> enhance_dataset(const BranchRegistry& registry,
                                             const std::vector<PreferenceExample>& dataset);

EvalResult evaluate_enhanced(const RewardHead& head, const std::vector<TrainingExample>& dataset,
                             const AblationMask& ablated = {});

/// Fan-out both sides of every example, score, count chosen > rejected.
EvalResult evaluate(const RewardHead& head, const BranchRegistry& registry,
                    const std::vector<PreferenceExample>& dataset,
                    const AblationMask& ablated = {});

struct AblationEntry {
  BranchKind kind = BranchKind::Semantic;
  double accuracy = 0.0;
  double delta = 0.0;  // baseline - ablated, signed
};

struct AblationResult {
  double baseline_accuracy = 0.0;
  std::vector<AblationEntry> entries;

  nlohmann::json to_json() const;
};

/// Inference ablation: re-evaluates with each kind's feature block zeroed at
/// featurization, no retraining. Unknown kinds are a configuration error.
AblationResult ablate(const RewardHead& head, const BranchRegistry& registry,
                      const std::vector<PreferenceExample>& dataset,
                      const std::vector<BranchKind>& kinds);

/// Full-procedure variant: retrains the head from scratch per ablated kind.
AblationResult ablate_with_retraining(const std::vector<TrainingExample>& dataset,
                                      const FeatureConfig& feature_config,
                                      const TrainConfig& train_config,
                                      const std::vector<BranchKind>& kinds);

struct AttributionEntry {
  std::string label;  // group label or "BIAS"
  double contribution = 0.0;
};

struct AttributionReport {
  std::vector<AttributionEntry> by_group;  // layout order, bias last
  std::vector<AttributionEntry> ranked;    // by |contribution|, descending
  double bias = 0.0;
  double total = 0.0;

  nlohmann::json to_json() const;
};

/// Exact blockwise decomposition of a linear score; contributions plus the
/// bias always reproduce the score.
AttributionReport attribute(const RewardHead& head, const EnhancedInput& x);

}  // namespace srm
