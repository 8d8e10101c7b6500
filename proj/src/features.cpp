#include "srm/reward/features.hpp"

#include "srm/branch/embedding.hpp"
#include "srm/core/jsonl.hpp"

namespace srm {

const std::vector<std::string>& signal_names(BranchKind kind) {
  static const std::vector<std::string> semantic = {"similarity"};
  static const std::vector<std::string> entity = {"entity_count", "fact_count"};
  static const std::vector<std::string> factcheck = {"matched", "refuted_hits"};
  static const std::vector<std::string> style = {"prompt_len", "resp_len", "ttr", "match"};
  static const std::vector<std::string> quality = {"distinct1", "distinct2", "rep3"};
  switch (kind) {
    case BranchKind::Semantic: return semantic;
    case BranchKind::Entity: return entity;
    case BranchKind::FactCheck: return factcheck;
    case BranchKind::Style: return style;
    case BranchKind::Quality: return quality;
  }
  throw ContractError("unknown branch kind");
}

size_t FeatureConfig::branch_block_dim(BranchKind kind) const {
  return sb_text_dim + signal_names(kind).size();
}

size_t FeatureConfig::total_dim() const {
  size_t d = base_dim;
  for (BranchKind k : kAllBranchKinds) d += branch_block_dim(k);
  return d;
}

std::vector<FeatureGroup> group_layout(const FeatureConfig& config) {
  std::vector<FeatureGroup> groups;
  groups.push_back({"BASE", 0, config.base_dim});
  size_t offset = config.base_dim;
  for (BranchKind k : kAllBranchKinds) {
    size_t dim = config.branch_block_dim(k);
    groups.push_back({"SB:" + to_string(k), offset, dim});
    offset += dim;
  }
  return groups;
}

namespace {

// Group-specific hash salts keep identical tokens in different segments on
// independent coordinates.
uint64_t group_seed(const FeatureConfig& config, int group_index) {
  return config.hash_seed * 1000003ULL + static_cast<uint64_t>(group_index);
}

}  // namespace

FeatureVector featurize(const EnhancedInput& x, const FeatureConfig& config,
                        const AblationMask& ablated) {
  if (config.base_dim < 2 || config.sb_text_dim < 2)
    throw ContractError("feature dims must be >= 2");

  FeatureVector out;
  out.values.assign(config.total_dim(), 0.0);

  std::string base_text = escape_segment(x.prompt().text) + segment_separator("RESPONSE") +
                          escape_segment(x.response().text);
  HashedEmbedding base = embed(base_text, config.base_dim, group_seed(config, 0));
  std::copy(base.vector.begin(), base.vector.end(), out.values.begin());

  size_t offset = config.base_dim;
  for (BranchKind kind : kAllBranchKinds) {
    const size_t block_dim = config.branch_block_dim(kind);
    const AuxiliaryRecord* rec = x.find(kind);
    if (rec != nullptr && !ablated.count(kind)) {
      HashedEmbedding text_emb = embed(rec->text, config.sb_text_dim, group_seed(config, ordinal(kind)));
      std::copy(text_emb.vector.begin(), text_emb.vector.end(), out.values.begin() + offset);
      const auto& names = signal_names(kind);
      for (size_t i = 0; i < names.size(); ++i) {
        auto it = rec->signals.find(names[i]);
        out.values[offset + config.sb_text_dim + i] = it != rec->signals.end() ? it->second : 0.0;
      }
    }
    offset += block_dim;
  }
  return out;
}

}  // namespace srm
