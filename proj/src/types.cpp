#include "srm/core/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace srm {

const std::string& to_string(BranchKind k) {
  static const std::array<std::string, kBranchCount> names = {
      "semantic", "entity", "factcheck", "style", "quality"};
  return names.at(static_cast<size_t>(ordinal(k) - 1));
}

std::optional<BranchKind> branch_kind_from_string(const std::string& name) {
  std::string lower;
  lower.reserve(name.size());
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (BranchKind k : kAllBranchKinds) {
    if (to_string(k) == lower) return k;
  }
  return std::nullopt;
}

bool has_visible_text(const std::string& text) {
  return std::any_of(text.begin(), text.end(), [](unsigned char c) {
    return !std::isspace(c);
  });
}

void validate(const Prompt& p) {
  if (!has_visible_text(p.text)) throw ContractError("prompt text is empty");
  if (p.id.empty()) throw ContractError("prompt id is empty");
}

void validate(const Response& r) {
  if (!has_visible_text(r.text)) throw ContractError("response text is empty");
}

void validate(const PreferenceExample& ex) {
  validate(ex.prompt);
  validate(ex.chosen);
  validate(ex.rejected);
  if (ex.chosen.text == ex.rejected.text)
    throw ContractError("chosen and rejected responses are identical (prompt id " + ex.prompt.id + ")");
}

void EnhancedInput::add_auxiliary(AuxiliaryRecord rec) {
  auto pos = std::lower_bound(
      auxiliaries_.begin(), auxiliaries_.end(), rec,
      [](const AuxiliaryRecord& a, const AuxiliaryRecord& b) {
        return ordinal(a.kind) < ordinal(b.kind);
      });
  if (pos != auxiliaries_.end() && pos->kind == rec.kind)
    throw ContractError("duplicate auxiliary for branch " + to_string(rec.kind));
  auxiliaries_.insert(pos, std::move(rec));
}

const AuxiliaryRecord* EnhancedInput::find(BranchKind kind) const {
  for (const auto& rec : auxiliaries_)
    if (rec.kind == kind) return &rec;
  return nullptr;
}

}  // namespace srm
