#pragma once

#include <string>
#include <vector>

#include "srm/reward/features.hpp"

namespace srm {

/// Linear scorer over the per-segment feature layout: score = w . phi + b.
/// The weight vector is partitioned by feature group, which makes the
/// per-branch attribution decomposition exact.
class RewardHead {
 public:
  RewardHead() = default;
  explicit RewardHead(FeatureConfig config)
      : config_(config), weights_(config.total_dim(), 0.0) {}
  RewardHead(FeatureConfig config, std::vector<double> weights, double bias);

  const FeatureConfig& config() const { return config_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& mutable_weights() { return weights_; }
  double bias() const { return bias_; }
  void set_bias(double b) { bias_ = b; }

  double score(const FeatureVector& features) const;
  double score(const EnhancedInput& x, const AblationMask& ablated = {}) const;

  void save(const std::string& path) const;
  static RewardHead load(const std::string& path);
  /// Load that refuses a model whose feature config differs from `expected`.
  static RewardHead load_checked(const std::string& path, const FeatureConfig& expected);

 private:
  FeatureConfig config_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

/// Eq-stable pairwise preference probability sigma(s_c - s_j).
double preference_prob(double score_chosen, double score_rejected);

/// -ln(preference_prob) in a form that never overflows.
double bt_loss(double score_chosen, double score_rejected);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_weights;
  double grad_bias = 0.0;  // the bias cancels in the pairwise difference
};

/// Bradley-Terry loss and exact gradient for one preference pair given the
/// two featurizations. With l2 > 0 the loss gains l2*|w|^2 and the gradient
/// 2*l2*w, so finite differences of the returned loss match the gradient.
LossGrad bt_loss_and_grad(const RewardHead& head, const FeatureVector& chosen,
                          const FeatureVector& rejected, double l2 = 0.0);

/// Featurizing overload for one example with both sides' branch records.
LossGrad bt_loss_and_grad(const RewardHead& head, const PreferenceExample& example,
                          const std::vector<AuxiliaryRecord>& aux_chosen,
                          const std::vector<AuxiliaryRecord>& aux_rejected, double l2 = 0.0);

}  // namespace srm
