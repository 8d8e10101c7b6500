#pragma once

#include <cstdint>
#include <vector>

#include "srm/reward/head.hpp"

namespace srm {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double eta = 0.1;
  int epochs = 20;
  double l2 = 1e-4;
  int batch_size = 16;
  uint64_t seed = 0;
  bool shuffle = true;
};

/// One preference example with both sides' precomputed branch records.
struct TrainingExample {
  PreferenceExample example;
  std::vector<AuxiliaryRecord> aux_chosen;
  std::vector<AuxiliaryRecord> aux_rejected;
};

struct TrainResult {
  RewardHead head;
  double initial_loss = 0.0;            // full pass before the first update
  std::vector<double> epoch_losses;     // mean per-example loss per epoch
};

/// Mini-batch gradient descent on the Bradley-Terry loss. Zero-initialized
/// weights, seeded Fisher-Yates shuffling per epoch, fixed summation order
/// within batches; bit-reproducible given identical inputs and seed.
/// Throws TrainingError if the loss stops being finite.
TrainResult train(const std::vector<TrainingExample>& dataset, const FeatureConfig& feature_config,
                  const TrainConfig& config, const AblationMask& ablated = {});

}  // namespace srm
