#include "srm/service/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "srm/core/jsonl.hpp"
#include "srm/eval/harness.hpp"

namespace srm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string StageContext::artifact(const std::string& name) const {
  return (fs::path(artifact_dir()) / name).string();
}

void write_artifact(const std::string& path, const std::string& contents) {
  if (!fs::path(path).parent_path().empty())
    fs::create_directories(fs::path(path).parent_path());
  const std::string partial = path + ".partial";
  {
    std::ofstream out(partial);
    if (!out) throw IoError("cannot open artifact for writing: " + partial);
    out << contents;
    out.flush();
    if (!out) throw IoError("write failure: " + partial);
  }
  fs::rename(partial, path);
}

namespace {

std::vector<std::pair<Prompt, Response>> response_pairs(
    const std::vector<PreferenceExample>& dataset) {
  std::vector<std::pair<Prompt, Response>> pairs;
  pairs.reserve(dataset.size() * 2);
  for (const auto& ex : dataset) {
    pairs.emplace_back(ex.prompt, ex.chosen);
    pairs.emplace_back(ex.prompt, ex.rejected);
  }
  return pairs;
}

std::vector<PreferenceExample> load_required_dataset(const std::string& stage,
                                                     const std::string& path,
                                                     const char* which) {
  if (path.empty())
    throw StageError(stage, std::string("config has no ") + which + " path");
  try {
    return load_dataset_file(path);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

TrainConfig train_config_with_seed(const StageContext& ctx) {
  TrainConfig tc = ctx.config.train;
  tc.seed = ctx.seed;
  return tc;
}

void require_head(const StageContext& ctx, const std::string& stage) {
  if (!fs::exists(ctx.artifact("head.json")))
    throw StageError(stage, "missing model: " + ctx.artifact("head.json") + " (run train-rm first)");
}

RewardHead load_head(const StageContext& ctx, const std::string& stage) {
  require_head(ctx, stage);
  try {
    return RewardHead::load_checked(ctx.artifact("head.json"), ctx.config.features);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

void stage_curate(const StageContext& ctx) {
  const std::string stage = "curate";
  auto dataset = load_required_dataset(stage, ctx.config.train_data, "train_data");
  auto pairs = response_pairs(dataset);
  auto resources = load_builtin_resources(ctx.config);
  BranchRegistry registry = build_registry(ctx.config, resources);
  JudgeSpec judge_spec = build_judge_spec(ctx.config);

  json reports = json::object();
  for (BranchKind kind : kAllBranchKinds) {
    const BranchSpec* generator = registry.find(kind);
    if (generator == nullptr) continue;
    auto [retained, report] =
        run_curation(pairs, *generator, judge_spec, ctx.config.bon_m, ctx.config.judge_concurrency);
    std::ostringstream body;
    serialize_curation(retained, body);
    write_artifact(ctx.artifact("curated_" + to_string(kind) + ".jsonl"), body.str());
    reports[to_string(kind)] = report.to_json();
    std::cout << "curate " << to_string(kind) << ": " << report.retained << "/"
              << report.candidates_in << " retained\n";
  }
  write_artifact(ctx.artifact("curation_report.json"), reports.dump(2) + "\n");
}

void stage_train_branch(const StageContext& ctx, std::optional<BranchKind> only) {
  const std::string stage = "train-branch";
  for (BranchKind kind : kAllBranchKinds) {
    if (only && *only != kind) continue;
    const std::string curated = ctx.artifact("curated_" + to_string(kind) + ".jsonl");
    if (!fs::exists(curated))
      throw StageError(stage, "missing curated data: " + curated + " (run curate first)");
    std::vector<CandidateTriple> rows;
    try {
      rows = load_curation_file(curated);
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
    if (rows.empty())
      throw StageError(stage, "no retained triples for branch " + to_string(kind) +
                                  "; lower judge tau or enlarge the dataset");
    std::vector<std::tuple<Prompt, Response, std::string>> triples;
    triples.reserve(rows.size());
    for (const auto& row : rows)
      triples.emplace_back(row.prompt, row.response, row.auxiliary.text);
    NgramLM lm = train_lm(triples, ctx.config.lm_order, ctx.config.lm_alpha);
    write_artifact(ctx.artifact("sb_" + to_string(kind) + ".lm.json"), lm.to_json() + "\n");
    std::cout << "train-branch " << to_string(kind) << ": " << triples.size() << " triples, |V|="
              << lm.vocab().size() << "\n";
  }
}

void stage_train_rm(const StageContext& ctx) {
  const std::string stage = "train-rm";
  auto dataset = load_required_dataset(stage, ctx.config.train_data, "train_data");
  auto resources = load_builtin_resources(ctx.config);
  BranchRegistry registry = build_registry(ctx.config, resources);
  auto enhanced = enhance_dataset(registry, dataset);
  TrainResult result;
  try {
    result = train(enhanced, ctx.config.features, train_config_with_seed(ctx));
  } catch (const TrainingError& e) {
    throw StageError(stage, e.what());
  }
  fs::create_directories(ctx.artifact_dir());
  result.head.save(ctx.artifact("head.json.partial"));
  fs::rename(ctx.artifact("head.json.partial"), ctx.artifact("head.json"));

  json losses{{"schema_version", 1},
              {"initial_loss", result.initial_loss},
              {"epoch_losses", result.epoch_losses}};
  write_artifact(ctx.artifact("losses.json"), losses.dump(2) + "\n");
  std::cout << "train-rm: loss " << result.initial_loss << " -> " << result.epoch_losses.back()
            << " over " << result.epoch_losses.size() << " epochs\n";
}

void stage_evaluate(const StageContext& ctx) {
  const std::string stage = "evaluate";
  RewardHead head = load_head(ctx, stage);
  auto dataset = load_required_dataset(stage, ctx.config.eval_data, "eval_data");
  auto resources = load_builtin_resources(ctx.config);
  BranchRegistry registry = build_registry(ctx.config, resources);
  EvalResult result = evaluate(head, registry, dataset);
  write_artifact(ctx.artifact("eval.json"), result.to_json().dump(2) + "\n");
  std::cout << "evaluate: accuracy " << result.accuracy << " (" << result.correct << "/"
            << result.total << ")\n";
}

void stage_ablate(const StageContext& ctx, bool retrain) {
  const std::string stage = "ablate";
  auto resources = load_builtin_resources(ctx.config);
  BranchRegistry registry = build_registry(ctx.config, resources);
  std::vector<BranchKind> kinds;
  for (const auto& spec : registry.specs()) kinds.push_back(spec.kind);

  AblationResult result;
  if (retrain) {
    auto dataset = load_required_dataset(stage, ctx.config.train_data, "train_data");
    result = ablate_with_retraining(enhance_dataset(registry, dataset), ctx.config.features,
                                    train_config_with_seed(ctx), kinds);
  } else {
    RewardHead head = load_head(ctx, stage);
    auto dataset = load_required_dataset(stage, ctx.config.eval_data, "eval_data");
    result = ablate(head, registry, dataset, kinds);
  }
  write_artifact(ctx.artifact("ablation.json"), result.to_json().dump(2) + "\n");
  std::cout << "ablate: baseline " << result.baseline_accuracy << "\n";
  for (const auto& e : result.entries)
    std::cout << "  - " << to_string(e.kind) << ": " << e.accuracy << " (delta "
              << e.delta << ")\n";
}

void stage_bench(const StageContext& ctx, BenchMode mode, size_t repetitions) {
  const std::string stage = "bench";
  auto dataset = load_required_dataset(stage, ctx.config.eval_data, "eval_data");
  std::vector<std::pair<Prompt, Response>> pairs;
  for (const auto& ex : dataset) pairs.emplace_back(ex.prompt, ex.chosen);
  auto resources = load_builtin_resources(ctx.config);
  BranchRegistry registry = build_registry(ctx.config, resources);

  BenchComparison cmp = bench_compare(registry, pairs, repetitions);
  const BenchResult& headline = mode == BenchMode::Sequential ? cmp.sequential : cmp.parallel;
  write_artifact(ctx.artifact("bench_" + to_string(mode) + ".json"),
                 headline.to_json().dump(2) + "\n");
  std::cout << "bench " << to_string(mode) << ": median " << headline.wall_ms << " ms, "
            << headline.per_1000_s << " s per 1000 samples, speedup "
            << (headline.speedup ? *headline.speedup : 0.0) << "\n";
}

void stage_pipeline(const StageContext& ctx) {
  stage_curate(ctx);
  stage_train_branch(ctx);
  stage_train_rm(ctx);
  stage_evaluate(ctx);

  json artifacts = json::object();
  artifacts["curation_report"] = ctx.artifact("curation_report.json");
  for (BranchKind kind : kAllBranchKinds) {
    artifacts["curated_" + to_string(kind)] = ctx.artifact("curated_" + to_string(kind) + ".jsonl");
    artifacts["sb_" + to_string(kind)] = ctx.artifact("sb_" + to_string(kind) + ".lm.json");
  }
  artifacts["head"] = ctx.artifact("head.json");
  artifacts["losses"] = ctx.artifact("losses.json");
  artifacts["eval"] = ctx.artifact("eval.json");

  const auto now = std::chrono::system_clock::now();
  json manifest{{"schema_version", 1},
                {"config_hash", ctx.config.config_hash},
                {"seed", ctx.seed},
                {"stages", {"curate", "train-branch", "train-rm", "evaluate"}},
                {"artifacts", std::move(artifacts)},
                {"timestamp", std::chrono::duration_cast<std::chrono::seconds>(
                                  now.time_since_epoch())
                                  .count()}};
  write_artifact(ctx.artifact("manifest.json"), manifest.dump(2) + "\n");
  std::cout << "pipeline: manifest written to " << ctx.artifact("manifest.json") << "\n";
}

}  // namespace srm
