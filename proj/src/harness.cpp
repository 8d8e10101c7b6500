#include "srm/eval/harness.hpp"

#include <algorithm>
#include <cmath>

namespace srm {

using nlohmann::json;

nlohmann::json EvalResult::to_json() const {
  json rows = json::array();
  for (const auto& rec : records)
    rows.push_back(json{{"id", rec.id},
                        {"score_chosen", rec.score_chosen},
                        {"score_rejected", rec.score_rejected},
                        {"correct", rec.correct}});
  return json{{"schema_version", 1},
              {"total", total},
              {"correct", correct},
              {"accuracy", accuracy},
              {"records", std::move(rows)}};
}

std::vector<TrainingExample> enhance_dataset(const BranchRegistry& registry,
                                             const std::vector<PreferenceExample>& dataset) {
  std::vector<TrainingExample> out;
  out.reserve(dataset.size());
  for (const auto& ex : dataset) {
    TrainingExample t;
    t.example = ex;
    t.aux_chosen = fan_out(registry, ex.prompt, ex.chosen).records;
    t.aux_rejected = fan_out(registry, ex.prompt, ex.rejected).records;
    out.push_back(std::move(t));
  }
  return out;
}

EvalResult evaluate_enhanced(const RewardHead& head, const std::vector<TrainingExample>& dataset,
                             const AblationMask& ablated) {
  if (dataset.empty()) throw ContractError("evaluation dataset is empty");
  EvalResult result;
  result.total = dataset.size();
  for (const auto& t : dataset) {
    EnhancedInput chosen(t.example.prompt, t.example.chosen);
    for (const auto& rec : t.aux_chosen) chosen.add_auxiliary(rec);
    EnhancedInput rejected(t.example.prompt, t.example.rejected);
    for (const auto& rec : t.aux_rejected) rejected.add_auxiliary(rec);

    EvalRecord rec;
    rec.id = t.example.prompt.id;
    rec.score_chosen = head.score(chosen, ablated);
    rec.score_rejected = head.score(rejected, ablated);
    rec.correct = rec.score_chosen > rec.score_rejected;
    if (rec.correct) ++result.correct;
    result.records.push_back(std::move(rec));
  }
  result.accuracy = static_cast<double>(result.correct) / static_cast<double>(result.total);
  return result;
}

EvalResult evaluate(const RewardHead& head, const BranchRegistry& registry,
                    const std::vector<PreferenceExample>& dataset, const AblationMask& ablated) {
  return evaluate_enhanced(head, enhance_dataset(registry, dataset), ablated);
}

nlohmann::json AblationResult::to_json() const {
  json rows = json::array();
  for (const auto& e : entries)
    rows.push_back(json{{"kind", to_string(e.kind)}, {"accuracy", e.accuracy}, {"delta", e.delta}});
  return json{{"schema_version", 1},
              {"baseline_accuracy", baseline_accuracy},
              {"ablations", std::move(rows)}};
}

namespace {

void check_kinds_registered(const BranchRegistry& registry, const std::vector<BranchKind>& kinds) {
  for (BranchKind k : kinds)
    if (registry.find(k) == nullptr)
      throw ContractError("cannot ablate unregistered branch " + to_string(k));
}

}  // namespace

AblationResult ablate(const RewardHead& head, const BranchRegistry& registry,
                      const std::vector<PreferenceExample>& dataset,
                      const std::vector<BranchKind>& kinds) {
  check_kinds_registered(registry, kinds);
  const auto enhanced = enhance_dataset(registry, dataset);
  AblationResult result;
  result.baseline_accuracy = evaluate_enhanced(head, enhanced).accuracy;
  for (BranchKind k : kinds) {
    AblationEntry entry;
    entry.kind = k;
    entry.accuracy = evaluate_enhanced(head, enhanced, AblationMask{k}).accuracy;
    entry.delta = result.baseline_accuracy - entry.accuracy;
    result.entries.push_back(entry);
  }
  return result;
}

AblationResult ablate_with_retraining(const std::vector<TrainingExample>& dataset,
                                      const FeatureConfig& feature_config,
                                      const TrainConfig& train_config,
                                      const std::vector<BranchKind>& kinds) {
  AblationResult result;
  TrainResult baseline = train(dataset, feature_config, train_config);
  result.baseline_accuracy = evaluate_enhanced(baseline.head, dataset).accuracy;
  for (BranchKind k : kinds) {
    AblationMask mask{k};
    TrainResult ablated = train(dataset, feature_config, train_config, mask);
    AblationEntry entry;
    entry.kind = k;
    entry.accuracy = evaluate_enhanced(ablated.head, dataset, mask).accuracy;
    entry.delta = result.baseline_accuracy - entry.accuracy;
    result.entries.push_back(entry);
  }
  return result;
}

nlohmann::json AttributionReport::to_json() const {
  json groups = json::array();
  for (const auto& e : by_group)
    groups.push_back(json{{"label", e.label}, {"contribution", e.contribution}});
  json order = json::array();
  for (const auto& e : ranked)
    order.push_back(json{{"label", e.label}, {"contribution", e.contribution}});
  return json{{"schema_version", 1},
              {"groups", std::move(groups)},
              {"ranked", std::move(order)},
              {"bias", bias},
              {"total", total}};
}

AttributionReport attribute(const RewardHead& head, const EnhancedInput& x) {
  const FeatureVector phi = featurize(x, head.config());
  AttributionReport report;
  report.bias = head.bias();
  double sum = head.bias();
  for (const auto& group : group_layout(head.config())) {
    double contribution = 0.0;
    for (size_t i = group.offset; i < group.offset + group.dim; ++i)
      contribution += head.weights()[i] * phi.values[i];
    report.by_group.push_back({group.label, contribution});
    sum += contribution;
  }
  report.total = sum;
  report.ranked = report.by_group;
  report.ranked.push_back({"BIAS", report.bias});
  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [](const AttributionEntry& a, const AttributionEntry& b) {
                     return std::abs(a.contribution) > std::abs(b.contribution);
                   });
  return report;
}

}  // namespace srm
