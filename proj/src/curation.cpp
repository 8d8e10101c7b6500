#include "srm/curation/curation.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "srm/branch/embedding.hpp"
#include "srm/core/text.hpp"

namespace srm {

using nlohmann::json;

uint64_t ScriptedJudge::key(const std::string& auxiliary_text) {
  return fnv1a64(auxiliary_text);
}

nlohmann::json CurationReport::to_json() const {
  return json{{"schema_version", 1},
              {"candidates_in", candidates_in},
              {"retained", retained},
              {"rejected", rejected},
              {"unjudged", unjudged},
              {"score_histogram", score_histogram}};
}

std::vector<CandidateTriple> sample_candidates(
    const std::vector<std::pair<Prompt, Response>>& pairs, const BranchSpec& generator,
    size_t m) {
  if (m < 1) throw ContractError("best-of-N width M must be >= 1");
  std::vector<CandidateTriple> out;
  out.reserve(pairs.size() * m);
  for (const auto& [p, r] : pairs) {
    for (size_t i = 1; i <= m; ++i) {
      CandidateTriple c;
      c.prompt = p;
      c.response = r;
      try {
        c.auxiliary = generate_record(generator, p, r, i);
      } catch (...) {
        c.auxiliary = degraded_record(generator.kind, /*timed_out=*/false);
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

namespace {

double heuristic_score(const CandidateTriple& c) {
  const auto aux_tokens = tokenize(c.auxiliary.text);
  const auto resp_tokens = tokenize(c.response.text);
  double overlap = jaccard(aux_tokens, resp_tokens);
  double length = std::min(1.0, static_cast<double>(c.auxiliary.text.size()) / 200.0);
  double diversity = distinct1(aux_tokens);
  return 0.5 * overlap + 0.3 * length + 0.2 * diversity;
}

std::optional<double> remote_score(const CandidateTriple& c, const RemoteJudge& judge) {
  httplib::Client client(judge.endpoint.host, judge.endpoint.port);
  const auto secs = judge.timeout.count() / 1000;
  const auto usecs = (judge.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  json request{{"prompt", c.prompt.text},
               {"response", c.response.text},
               {"auxiliary", c.auxiliary.text}};
  auto result = client.Post(judge.endpoint.path, request.dump(), "application/json");
  if (!result || result->status != 200) return std::nullopt;
  try {
    json body = json::parse(result->body);
    if (!body.contains("score") || !body.at("score").is_number()) return std::nullopt;
    double q = body.at("score").get<double>();
    if (q < 0.0 || q > 1.0 || !std::isfinite(q)) return std::nullopt;
    return q;
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
}

}  // namespace

CandidateTriple judge(CandidateTriple candidate, const JudgeSpec& spec) {
  if (candidate.judge_score)
    throw ContractError("candidate already judged (prompt id " + candidate.prompt.id + ")");
  if (std::holds_alternative<HeuristicJudge>(spec.backend)) {
    candidate.judge_score = heuristic_score(candidate);
  } else if (const auto* scripted = std::get_if<ScriptedJudge>(&spec.backend)) {
    auto it = scripted->table.find(ScriptedJudge::key(candidate.auxiliary.text));
    if (it != scripted->table.end()) {
      candidate.judge_score = it->second;
    } else if (scripted->fallback) {
      candidate.judge_score = *scripted->fallback;
    }
  } else {
    candidate.judge_score = remote_score(candidate, std::get<RemoteJudge>(spec.backend));
  }
  if (candidate.judge_score && (*candidate.judge_score < 0.0 || *candidate.judge_score > 1.0))
    throw ContractError("judge produced a score outside [0,1]");
  return candidate;
}

std::vector<CandidateTriple> judge_all(std::vector<CandidateTriple> candidates,
                                       const JudgeSpec& spec, int concurrency) {
  if (concurrency < 1) throw ContractError("judge concurrency must be >= 1");
  const size_t n = candidates.size();
  if (n == 0) return candidates;
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
      candidates[i] = judge(std::move(candidates[i]), spec);
  };
  size_t workers = std::min<size_t>(static_cast<size_t>(concurrency), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return candidates;
}

std::pair<std::vector<CandidateTriple>, CurationReport> filter(
    const std::vector<CandidateTriple>& candidates, double tau) {
  if (tau < 0.0 || tau > 1.0) throw ContractError("filter threshold must be in [0,1]");
  std::vector<CandidateTriple> retained;
  CurationReport report;
  report.candidates_in = candidates.size();
  for (const auto& c : candidates) {
    if (c.judge_score) {
      double q = *c.judge_score;
      size_t bin = std::min<size_t>(9, static_cast<size_t>(q * 10.0));
      ++report.score_histogram[bin];
      if (q >= tau) {
        retained.push_back(c);
        ++report.retained;
        continue;
      }
    } else {
      ++report.unjudged;
      ++report.score_histogram[0];
    }
    ++report.rejected;
  }
  return {std::move(retained), report};
}

std::pair<std::vector<CandidateTriple>, CurationReport> run_curation(
    const std::vector<std::pair<Prompt, Response>>& pairs, const BranchSpec& generator,
    const JudgeSpec& judge_spec, size_t m, int concurrency) {
  auto candidates = sample_candidates(pairs, generator, m);
  candidates = judge_all(std::move(candidates), judge_spec, concurrency);
  return filter(candidates, judge_spec.tau);
}

}  // namespace srm
