#include "srm/service/server.hpp"

#include <httplib.h>

#include <filesystem>

#include "srm/core/jsonl.hpp"

namespace srm {

using nlohmann::json;

struct ScoringService::Impl {
  httplib::Server server;
};

namespace {

std::string require_body_string(const json& body, const char* field) {
  if (!body.contains(field) || !body.at(field).is_string())
    throw BadRequest("missing_field", std::string("field '") + field + "' (string) is required");
  std::string value = body.at(field).get<std::string>();
  if (!has_visible_text(value))
    throw BadRequest("empty_field", std::string("field '") + field + "' must be non-empty");
  return value;
}

json auxiliaries_to_json(const std::vector<AuxiliaryRecord>& records) {
  json out = json::array();
  for (const auto& rec : records) {
    json signals = json::object();
    for (const auto& [name, value] : rec.signals) signals[name] = value;
    out.push_back(json{{"kind", to_string(rec.kind)}, {"signals", std::move(signals)}, {"text", rec.text}});
  }
  return out;
}

json latency_to_json(const LatencyReport& latency) {
  json per_branch = json::object();
  for (const auto& b : latency.branches) per_branch[to_string(b.kind)] = b.wall_ms;
  return json{{"per_branch_ms", std::move(per_branch)}, {"total_ms", latency.total_wall_ms}};
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

ScoringService::ScoringService(const AppConfig& config)
    : config_(config), impl_(std::make_unique<Impl>()) {
  if (!std::filesystem::exists(config_.head_path()))
    throw IoError("missing model: " + config_.head_path() + " (run train-rm first)");
  resources_ = load_builtin_resources(config_);
  registry_ = std::make_unique<BranchRegistry>(build_registry(config_, resources_));
  head_ = RewardHead::load_checked(config_.head_path(), config_.features);

  auto handle = [this](const httplib::Request& req, httplib::Response& res,
                       json (ScoringService::*handler)(const json&)) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error&) {
      ++bad_requests_;
      res.status = 400;
      res.set_content(json{{"error", {{"code", "malformed_json"}, {"message", "body is not valid JSON"}}}}.dump(),
                      "application/json");
      return;
    }
    try {
      res.set_content((this->*handler)(body).dump(), "application/json");
    } catch (const BadRequest& e) {
      ++bad_requests_;
      res.status = 400;
      res.set_content(json{{"error", {{"code", e.code()}, {"message", e.what()}}}}.dump(),
                      "application/json");
    }
  };

  impl_->server.Post("/v1/score", [this, handle](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, &ScoringService::handle_score);
  });
  impl_->server.Post("/v1/compare", [this, handle](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, &ScoringService::handle_compare);
  });
  impl_->server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(handle_health().dump(), "application/json");
  });
  impl_->server.Get("/v1/metrics", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(metrics_text(), "text/plain");
  });
}

ScoringService::~ScoringService() { stop(); }

json ScoringService::handle_score(const json& request) {
  ++score_requests_;
  Prompt prompt{"request", require_body_string(request, "prompt")};
  Response response{require_body_string(request, "response")};
  bool include_attribution = false;
  if (request.contains("include_attribution")) {
    if (!request.at("include_attribution").is_boolean())
      throw BadRequest("invalid_field", "include_attribution must be a boolean");
    include_attribution = request.at("include_attribution").get<bool>();
  }

  FanOutResult result = fan_out(*registry_, prompt, response);
  for (const auto& b : result.latency.branches)
    if (b.timed_out) ++branch_timeouts_;

  EnhancedInput input(prompt, response);
  for (const auto& rec : result.records) input.add_auxiliary(rec);
  const double raw = head_.score(input);

  json out{{"score", raw},
           {"sigmoid_score", sigmoid(raw)},
           {"auxiliaries", auxiliaries_to_json(result.records)},
           {"latency", latency_to_json(result.latency)}};
  if (include_attribution) out["attribution"] = attribute(head_, input).to_json();
  return out;
}

json ScoringService::handle_compare(const json& request) {
  ++compare_requests_;
  Prompt prompt{"request", require_body_string(request, "prompt")};
  Response response_a{require_body_string(request, "response_a")};
  Response response_b{require_body_string(request, "response_b")};

  FanOutResult result_a = fan_out(*registry_, prompt, response_a);
  FanOutResult result_b = fan_out(*registry_, prompt, response_b);
  for (const auto* r : {&result_a, &result_b})
    for (const auto& b : r->latency.branches)
      if (b.timed_out) ++branch_timeouts_;

  EnhancedInput input_a(prompt, response_a);
  for (const auto& rec : result_a.records) input_a.add_auxiliary(rec);
  EnhancedInput input_b(prompt, response_b);
  for (const auto& rec : result_b.records) input_b.add_auxiliary(rec);

  const double score_a = head_.score(input_a);
  const double score_b = head_.score(input_b);
  return json{{"score_a", score_a},
              {"score_b", score_b},
              {"preference_prob", preference_prob(score_a, score_b)},
              {"latency_a", latency_to_json(result_a.latency)},
              {"latency_b", latency_to_json(result_b.latency)}};
}

json ScoringService::handle_health() const {
  json branches = json::array();
  for (const auto& spec : registry_->specs()) {
    const char* backend = "builtin";
    if (std::holds_alternative<ScriptedBackend>(spec.backend)) backend = "scripted";
    if (std::holds_alternative<RemoteBackend>(spec.backend)) backend = "remote";
    if (std::holds_alternative<TrainedBackend>(spec.backend)) backend = "trained";
    branches.push_back(json{{"kind", to_string(spec.kind)}, {"backend", backend}, {"ready", true}});
  }
  return json{{"status", "ok"}, {"branches", std::move(branches)}};
}

std::string ScoringService::metrics_text() const {
  std::string out;
  out += "srm_score_requests_total " + std::to_string(score_requests_.load()) + "\n";
  out += "srm_compare_requests_total " + std::to_string(compare_requests_.load()) + "\n";
  out += "srm_bad_requests_total " + std::to_string(bad_requests_.load()) + "\n";
  out += "srm_branch_timeouts_total " + std::to_string(branch_timeouts_.load()) + "\n";
  return out;
}

bool ScoringService::listen() {
  port_ = config_.bind_port;
  return impl_->server.listen(config_.bind_host, config_.bind_port);
}

bool ScoringService::start_async() {
  if (config_.bind_port == 0) {
    port_ = impl_->server.bind_to_any_port(config_.bind_host);
    if (port_ <= 0) return false;
  } else {
    if (!impl_->server.bind_to_port(config_.bind_host, config_.bind_port)) return false;
    port_ = config_.bind_port;
  }
  server_thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return true;
}

void ScoringService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace srm
