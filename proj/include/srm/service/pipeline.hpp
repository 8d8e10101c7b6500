#pragma once

#include <optional>
#include <string>

#include "srm/eval/bench.hpp"
#include "srm/service/config.hpp"

namespace srm {

/// A pipeline stage failed; the CLI reports the stage name and exits 2.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Shared stage context: loaded config, run seed, optional artifact-dir
/// override (--out).
struct StageContext {
  AppConfig config;
  uint64_t seed = 0;
  std::string out_dir;  // empty -> config.model_dir

  std::string artifact_dir() const { return out_dir.empty() ? config.model_dir : out_dir; }
  std::string artifact(const std::string& name) const;
};

/// Atomic artifact write: contents land in <path>.partial and are renamed
/// on success, so failures leave only .partial files behind.
void write_artifact(const std::string& path, const std::string& contents);

void stage_curate(const StageContext& ctx);
void stage_train_branch(const StageContext& ctx, std::optional<BranchKind> only = std::nullopt);
void stage_train_rm(const StageContext& ctx);
void stage_evaluate(const StageContext& ctx);
void stage_ablate(const StageContext& ctx, bool retrain);
void stage_bench(const StageContext& ctx, BenchMode mode, size_t repetitions);

/// curate -> train-branch (all) -> train-rm -> evaluate, then writes the
/// run manifest (config hash, seed, artifact paths).
void stage_pipeline(const StageContext& ctx);

}  // namespace srm
