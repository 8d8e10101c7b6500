#include "srm/reward/head.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "srm/core/jsonl.hpp"

namespace srm {

using nlohmann::json;

RewardHead::RewardHead(FeatureConfig config, std::vector<double> weights, double bias)
    : config_(config), weights_(std::move(weights)), bias_(bias) {
  if (weights_.size() != config_.total_dim())
    throw ContractError("weight vector length " + std::to_string(weights_.size()) +
                        " does not match feature dim " + std::to_string(config_.total_dim()));
}

double RewardHead::score(const FeatureVector& features) const {
  if (features.values.size() != weights_.size())
    throw ContractError("feature vector length does not match head dimension");
  double s = bias_;
  for (size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * features.values[i];
  return s;
}

double RewardHead::score(const EnhancedInput& x, const AblationMask& ablated) const {
  return score(featurize(x, config_, ablated));
}

double preference_prob(double score_chosen, double score_rejected) {
  const double d = score_chosen - score_rejected;
  if (d >= 0.0) {
    return 1.0 / (1.0 + std::exp(-d));
  }
  const double e = std::exp(d);
  return e / (1.0 + e);
}

double bt_loss(double score_chosen, double score_rejected) {
  const double d = score_chosen - score_rejected;
  // -ln sigma(d) = log(1 + e^{-d}), stable on both tails
  if (d >= 0.0) return std::log1p(std::exp(-d));
  return -d + std::log1p(std::exp(d));
}

LossGrad bt_loss_and_grad(const RewardHead& head, const FeatureVector& chosen,
                          const FeatureVector& rejected, double l2) {
  const double s_c = head.score(chosen);
  const double s_j = head.score(rejected);
  const double p = preference_prob(s_c, s_j);

  LossGrad out;
  out.loss = bt_loss(s_c, s_j);
  out.grad_weights.resize(head.weights().size());
  const double coeff = p - 1.0;
  for (size_t i = 0; i < out.grad_weights.size(); ++i)
    out.grad_weights[i] = coeff * (chosen.values[i] - rejected.values[i]);
  out.grad_bias = 0.0;
  if (l2 > 0.0) {
    double reg = 0.0;
    for (size_t i = 0; i < head.weights().size(); ++i) {
      out.grad_weights[i] += 2.0 * l2 * head.weights()[i];
      reg += head.weights()[i] * head.weights()[i];
    }
    out.loss += l2 * reg;
  }
  return out;
}

LossGrad bt_loss_and_grad(const RewardHead& head, const PreferenceExample& example,
                          const std::vector<AuxiliaryRecord>& aux_chosen,
                          const std::vector<AuxiliaryRecord>& aux_rejected, double l2) {
  EnhancedInput chosen(example.prompt, example.chosen);
  for (const auto& rec : aux_chosen) chosen.add_auxiliary(rec);
  EnhancedInput rejected(example.prompt, example.rejected);
  for (const auto& rec : aux_rejected) rejected.add_auxiliary(rec);
  return bt_loss_and_grad(head, featurize(chosen, head.config()),
                          featurize(rejected, head.config()), l2);
}

void RewardHead::save(const std::string& path) const {
  json doc{{"schema_version", 1},
           {"feature_config",
            {{"base_dim", config_.base_dim},
             {"sb_text_dim", config_.sb_text_dim},
             {"hash_seed", config_.hash_seed}}},
           {"weights", weights_},
           {"bias", bias_}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot open head file for writing: " + path);
  out << doc.dump(2) << '\n';
}

RewardHead RewardHead::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open head file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("reward head JSON: ") + e.what());
  }
  FeatureConfig config;
  const auto& fc = doc.at("feature_config");
  config.base_dim = fc.at("base_dim").get<size_t>();
  config.sb_text_dim = fc.at("sb_text_dim").get<size_t>();
  config.hash_seed = fc.at("hash_seed").get<uint64_t>();
  return RewardHead(config, doc.at("weights").get<std::vector<double>>(),
                    doc.at("bias").get<double>());
}

RewardHead RewardHead::load_checked(const std::string& path, const FeatureConfig& expected) {
  RewardHead head = load(path);
  if (!(head.config() == expected))
    throw ContractError("reward head feature config does not match the configured featurizer");
  return head;
}

}  // namespace srm
