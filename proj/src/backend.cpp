#include "srm/branch/backend.hpp"

#include <thread>

#include "srm/branch/embedding.hpp"
#include "srm/branch/remote.hpp"
#include "srm/core/text.hpp"

namespace srm {

uint64_t ScriptedBackend::key(const Prompt& p, const Response& r) {
  std::string joined = p.text;
  joined.push_back('\x1f');
  joined += r.text;
  return fnv1a64(joined);
}

BranchRegistry::BranchRegistry(std::vector<BranchSpec> specs, int concurrency_limit)
    : specs_(std::move(specs)), concurrency_limit_(concurrency_limit) {
  if (concurrency_limit_ < 1) throw ContractError("concurrency_limit must be >= 1");
  for (size_t i = 0; i < specs_.size(); ++i) {
    if (specs_[i].timeout.count() <= 0) throw ContractError("branch timeout must be > 0");
    for (size_t j = i + 1; j < specs_.size(); ++j)
      if (specs_[i].kind == specs_[j].kind)
        throw ContractError("duplicate branch spec for kind " + to_string(specs_[i].kind));
  }
}

const BranchSpec* BranchRegistry::find(BranchKind kind) const {
  for (const auto& spec : specs_)
    if (spec.kind == kind) return &spec;
  return nullptr;
}

AuxiliaryRecord degraded_record(BranchKind kind, bool timed_out) {
  AuxiliaryRecord rec;
  rec.kind = kind;
  rec.signals[timed_out ? "timeout" : "error"] = 1.0;
  rec.text = "branch unavailable";
  return rec;
}

AuxiliaryRecord generate_record(const BranchSpec& spec, const Prompt& p, const Response& r,
                                uint64_t seed) {
  if (const auto* builtin = std::get_if<BuiltinBackend>(&spec.backend)) {
    AuxiliaryRecord rec = run_builtin(spec.kind, p, r, *builtin->resources);
    rec.text = candidate_variant(rec.text, seed);
    return rec;
  }
  if (const auto* scripted = std::get_if<ScriptedBackend>(&spec.backend)) {
    if (scripted->delay.count() > 0) std::this_thread::sleep_for(scripted->delay);
    const auto it = scripted->table.find(ScriptedBackend::key(p, r));
    if (it == scripted->table.end() && !scripted->fallback)
      throw ContractError("scripted branch has no entry for this (prompt, response)");
    AuxiliaryRecord rec = it != scripted->table.end() ? it->second : *scripted->fallback;
    rec.kind = spec.kind;
    rec.text = candidate_variant(rec.text, seed);
    return rec;
  }
  if (const auto* remote = std::get_if<RemoteBackend>(&spec.backend)) {
    return call_remote(remote->endpoint, spec.kind, p, r, spec.timeout, seed);
  }
  const auto& trained = std::get<TrainedBackend>(spec.backend);
  auto context = conditioning_tokens(p, r);
  auto mode = seed == 0 ? NgramLM::Decoding::Greedy : NgramLM::Decoding::Sampled;
  std::string text = trained.lm->generate(context, trained.max_tokens, seed, mode);
  AuxiliaryRecord rec;
  rec.kind = spec.kind;
  rec.signals["lm_tokens"] = static_cast<double>(tokenize(text).size());
  rec.signals["lm_nll"] = text.empty() ? 0.0 : trained.lm->mean_nll(p, r, text);
  rec.text = text;
  return rec;
}

}  // namespace srm
