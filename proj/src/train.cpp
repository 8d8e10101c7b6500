#include "srm/reward/train.hpp"

#include <cmath>

namespace srm {

namespace {

// splitmix64; pinned so shuffles reproduce across platforms.
uint64_t next_random(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void fisher_yates(std::vector<size_t>& order, uint64_t& rng_state) {
  for (size_t i = order.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(next_random(rng_state) % i);
    std::swap(order[i - 1], order[j]);
  }
}

}  // namespace

TrainResult train(const std::vector<TrainingExample>& dataset, const FeatureConfig& feature_config,
                  const TrainConfig& config, const AblationMask& ablated) {
  if (dataset.empty()) throw TrainingError("training dataset is empty");
  if (config.eta <= 0.0) throw TrainingError("step size must be > 0");
  if (config.epochs < 1) throw TrainingError("epochs must be >= 1");
  if (config.batch_size < 1) throw TrainingError("batch size must be >= 1");
  if (config.l2 < 0.0) throw TrainingError("l2 coefficient must be >= 0");

  const size_t n = dataset.size();
  std::vector<FeatureVector> phi_chosen(n), phi_rejected(n);
  for (size_t i = 0; i < n; ++i) {
    EnhancedInput chosen(dataset[i].example.prompt, dataset[i].example.chosen);
    for (const auto& rec : dataset[i].aux_chosen) chosen.add_auxiliary(rec);
    EnhancedInput rejected(dataset[i].example.prompt, dataset[i].example.rejected);
    for (const auto& rec : dataset[i].aux_rejected) rejected.add_auxiliary(rec);
    phi_chosen[i] = featurize(chosen, feature_config, ablated);
    phi_rejected[i] = featurize(rejected, feature_config, ablated);
  }

  TrainResult result;
  result.head = RewardHead(feature_config);
  const size_t dim = feature_config.total_dim();

  const auto full_loss = [&] {
    double total = 0.0;
    double reg = 0.0;
    for (size_t i = 0; i < n; ++i)
      total += bt_loss(result.head.score(phi_chosen[i]), result.head.score(phi_rejected[i]));
    if (config.l2 > 0.0)
      for (double w : result.head.weights()) reg += w * w;
    return total / static_cast<double>(n) + config.l2 * reg;
  };
  result.initial_loss = full_loss();

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  uint64_t rng_state = config.seed ^ 0xD1B54A32D192ED03ULL;

  std::vector<double> grad(dim);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) fisher_yates(order, rng_state);
    double epoch_loss = 0.0;
    for (size_t begin = 0; begin < n; begin += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(n, begin + static_cast<size_t>(config.batch_size));
      const double batch_n = static_cast<double>(end - begin);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (size_t k = begin; k < end; ++k) {
        const auto& pc = phi_chosen[order[k]];
        const auto& pj = phi_rejected[order[k]];
        const double s_c = result.head.score(pc);
        const double s_j = result.head.score(pj);
        const double p = preference_prob(s_c, s_j);
        batch_loss += bt_loss(s_c, s_j);
        const double coeff = (p - 1.0) / batch_n;
        for (size_t d = 0; d < dim; ++d)
          grad[d] += coeff * (pc.values[d] - pj.values[d]);
      }
      if (!std::isfinite(batch_loss))
        throw TrainingError("loss diverged (step size too large); epoch " + std::to_string(epoch));
      auto& w = result.head.mutable_weights();
      if (config.l2 > 0.0) {
        const double shrink = 2.0 * config.l2;
        for (size_t d = 0; d < dim; ++d) grad[d] += shrink * w[d];
      }
      for (size_t d = 0; d < dim; ++d) w[d] -= config.eta * grad[d];
      epoch_loss += batch_loss;
    }
    double reg = 0.0;
    if (config.l2 > 0.0)
      for (double w : result.head.weights()) reg += w * w;
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(n) + config.l2 * reg);
  }
  return result;
}

}  // namespace srm
