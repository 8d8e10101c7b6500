#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "srm/eval/harness.hpp"
#include "srm/service/config.hpp"

namespace srm {

/// Request body failed validation; maps to HTTP 400 with an error code.
class BadRequest : public std::runtime_error {
 public:
  BadRequest(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Long-running scoring surface over immutable loaded artifacts.
/// Endpoints (all JSON, versioned under /v1):
///   POST /v1/score    {prompt, response, include_attribution?}
///   POST /v1/compare  {prompt, response_a, response_b}
///   GET  /v1/health
///   GET  /v1/metrics  (plain-text counters)
class ScoringService {
 public:
  explicit ScoringService(const AppConfig& config);
  ~ScoringService();

  ScoringService(const ScoringService&) = delete;
  ScoringService& operator=(const ScoringService&) = delete;

  nlohmann::json handle_score(const nlohmann::json& request);
  nlohmann::json handle_compare(const nlohmann::json& request);
  nlohmann::json handle_health() const;
  std::string metrics_text() const;

  /// Binds and serves until stop(); returns false if binding failed.
  bool listen();
  /// Binds (port 0 picks an ephemeral port) and serves on a background
  /// thread; returns once the listener is accepting.
  bool start_async();
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;

  AppConfig config_;
  std::shared_ptr<const BuiltinResources> resources_;
  std::unique_ptr<BranchRegistry> registry_;
  RewardHead head_;

  std::unique_ptr<Impl> impl_;
  std::thread server_thread_;
  int port_ = 0;

  mutable std::atomic<uint64_t> score_requests_{0};
  mutable std::atomic<uint64_t> compare_requests_{0};
  mutable std::atomic<uint64_t> bad_requests_{0};
  mutable std::atomic<uint64_t> branch_timeouts_{0};
};

}  // namespace srm
