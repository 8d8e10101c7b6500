#pragma once

#include <map>
#include <memory>
#include <string>

#include "srm/branch/backend.hpp"
#include "srm/curation/curation.hpp"
#include "srm/reward/train.hpp"

namespace srm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full application configuration. Every tunable lives here; the shipped
/// config files carry the documented defaults.
struct AppConfig {
  struct BranchEntry {
    std::string backend = "builtin";  // builtin | scripted | remote | trained
    int timeout_ms = 1000;
    // remote
    std::string host = "127.0.0.1";
    int port = 0;
    std::string path = "/v1/branch";
    // scripted
    int delay_ms = 0;
    std::string scripted_text = "scripted response";
    // trained
    std::string model_file;  // empty -> <model_dir>/sb_<kind>.lm.json
  };

  // registry
  int concurrency_limit = 8;
  size_t embed_dim = 1024;
  std::map<BranchKind, BranchEntry> branches;  // defaults to all five builtin

  // judge
  std::string judge_backend = "heuristic";  // heuristic | remote
  double tau = 0.6;
  size_t bon_m = 8;
  int judge_concurrency = 4;
  std::string judge_host = "127.0.0.1";
  int judge_port = 0;
  std::string judge_path = "/v1/judge";
  int judge_timeout_ms = 2000;

  FeatureConfig features;
  BranchThresholds thresholds;

  // branch language models
  int lm_order = 3;
  double lm_alpha = 0.1;
  size_t lm_max_tokens = 32;

  TrainConfig train;

  // paths, resolved against the config file directory
  std::string kg_path;
  std::string claims_path;
  std::string lexicon_path;
  std::string train_data;
  std::string eval_data;
  std::string model_dir = "artifacts";

  // service
  std::string bind_host = "127.0.0.1";
  int bind_port = 8080;

  std::string config_hash;  // FNV-1a of the raw config bytes

  /// Loads TOML (default) or JSON (.json extension), validates invariants
  /// and path existence.
  static AppConfig load(const std::string& path);
  static AppConfig from_toml_text(const std::string& text, const std::string& base_dir);
  static AppConfig from_json_text(const std::string& text, const std::string& base_dir);

  std::string head_path() const;
  std::string lm_path(BranchKind kind) const;
};

/// Reads KG, claims and lexicon files into shared branch resources.
std::shared_ptr<const BuiltinResources> load_builtin_resources(const AppConfig& config);

/// Materializes the configured branch registry. Trained backends load their
/// model files here.
BranchRegistry build_registry(const AppConfig& config,
                              std::shared_ptr<const BuiltinResources> resources);

JudgeSpec build_judge_spec(const AppConfig& config);

}  // namespace srm
