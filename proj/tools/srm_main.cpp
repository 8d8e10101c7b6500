#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "srm/service/pipeline.hpp"
#include "srm/service/server.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitStageFailure = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"srm - structural reward model pipeline and scoring service"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--config", config_path, "configuration file (.toml or .json)");
  app.add_option("--seed", seed, "run seed for training and sampling");
  app.add_option("--out", out_dir, "artifact directory override");

  auto* curate = app.add_subcommand("curate", "sample, judge and filter branch training data");
  std::string only_kind;
  auto* train_branch = app.add_subcommand("train-branch", "train branch language models");
  train_branch->add_option("--kind", only_kind, "train only this branch kind");
  auto* train_rm = app.add_subcommand("train-rm", "train the reward head");
  auto* evaluate = app.add_subcommand("evaluate", "preference accuracy on the eval dataset");

  bool retrain = false;
  auto* ablate = app.add_subcommand("ablate", "per-branch inference ablation");
  ablate->add_flag("--retrain", retrain, "retrain the head for each ablation");

  std::string bench_mode = "par";
  size_t repetitions = 3;
  auto* bench = app.add_subcommand("bench", "sequential vs parallel branch benchmark");
  bench->add_option("--mode", bench_mode, "seq or par")->check(CLI::IsMember({"seq", "par"}));
  bench->add_option("--reps", repetitions, "repetitions (median taken, >= 3)");

  std::string prompt_text, response_text;
  bool with_attribution = false;
  auto* score = app.add_subcommand("score", "score one (prompt, response) pair");
  score->add_option("--prompt", prompt_text, "prompt text")->required();
  score->add_option("--response", response_text, "response text")->required();
  score->add_flag("--attribution", with_attribution, "include per-branch attribution");

  auto* serve = app.add_subcommand("serve", "run the HTTP scoring service");

  auto* pipeline = app.add_subcommand("pipeline", "multi-stage runs");
  auto* pipeline_run = pipeline->add_subcommand("run", "curate, train branches, train RM, evaluate");
  pipeline->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (config_path.empty()) {
    if (const char* env = std::getenv("SRM_CONFIG")) config_path = env;
  }
  if (config_path.empty()) {
    std::cerr << "error: no configuration (--config or SRM_CONFIG)\n";
    return kExitUsage;
  }

  srm::StageContext ctx;
  try {
    ctx.config = srm::AppConfig::load(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  ctx.seed = seed;
  ctx.out_dir = out_dir;

  const std::string stage_name = app.get_subcommands().front()->get_name();
  try {
    if (curate->parsed()) {
      srm::stage_curate(ctx);
    } else if (train_branch->parsed()) {
      std::optional<srm::BranchKind> only;
      if (!only_kind.empty()) {
        only = srm::branch_kind_from_string(only_kind);
        if (!only) {
          std::cerr << "error: unknown branch kind '" << only_kind << "'\n";
          return kExitUsage;
        }
      }
      srm::stage_train_branch(ctx, only);
    } else if (train_rm->parsed()) {
      srm::stage_train_rm(ctx);
    } else if (evaluate->parsed()) {
      srm::stage_evaluate(ctx);
    } else if (ablate->parsed()) {
      srm::stage_ablate(ctx, retrain);
    } else if (bench->parsed()) {
      srm::stage_bench(ctx, bench_mode == "seq" ? srm::BenchMode::Sequential : srm::BenchMode::Parallel,
                       repetitions);
    } else if (score->parsed()) {
      srm::AppConfig config = ctx.config;
      if (!ctx.out_dir.empty()) config.model_dir = ctx.out_dir;
      srm::ScoringService service(config);
      nlohmann::json request{{"prompt", prompt_text},
                             {"response", response_text},
                             {"include_attribution", with_attribution}};
      std::cout << service.handle_score(request).dump(2) << "\n";
    } else if (serve->parsed()) {
      srm::AppConfig config = ctx.config;
      if (!ctx.out_dir.empty()) config.model_dir = ctx.out_dir;
      srm::ScoringService service(config);
      std::cout << "serving on " << config.bind_host << ":" << config.bind_port << "\n";
      if (!service.listen()) {
        std::cerr << "error: failed to bind " << config.bind_host << ":" << config.bind_port << "\n";
        return kExitStageFailure;
      }
    } else if (pipeline_run->parsed()) {
      srm::stage_pipeline(ctx);
    }
  } catch (const srm::StageError& e) {
    std::cerr << "error: stage '" << e.stage() << "' failed: " << e.what() << "\n";
    return kExitStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: stage '" << stage_name << "' failed: " << e.what() << "\n";
    return kExitStageFailure;
  }
  return kExitOk;
}
