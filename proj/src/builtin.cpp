#include "srm/branch/builtin.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>

#include "srm/branch/embedding.hpp"
#include "srm/core/jsonl.hpp"
#include "srm/core/text.hpp"

namespace srm {

FormalLexicon FormalLexicon::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon file: " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.insert(to_lower_ascii(line));
  }
  return FormalLexicon(std::move(words));
}

std::string format_signal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

AuxiliaryRecord run_semantic(const Prompt& p, const Response& r,
                             const BranchThresholds& thresholds, size_t embed_dim) {
  HashedEmbedding ep = embed(p.text, embed_dim);
  HashedEmbedding er = embed(r.text, embed_dim);
  double similarity = cosine(ep, er).value_or(0.0);
  const char* label = similarity >= thresholds.similarity_aligned ? "aligned"
                      : similarity >= thresholds.similarity_weak  ? "weakly aligned"
                                                                  : "misaligned";
  AuxiliaryRecord rec;
  rec.kind = BranchKind::Semantic;
  rec.signals["similarity"] = similarity;
  rec.text = "semantic similarity " + format_signal(similarity) + "; " + label;
  return rec;
}

namespace {

// Longest-match scan: at each position take the longest entity matching
// there, then skip past it. Case-insensitive over ASCII.
void detect_entities(const std::string& text, const KnowledgeGraph& kg,
                     std::set<std::string>& found) {
  std::string lowered = to_lower_ascii(text);
  std::vector<std::pair<std::string, std::string>> lowered_entities;  // (lowered, original)
  lowered_entities.reserve(kg.entities().size());
  for (const auto& e : kg.entities()) lowered_entities.emplace_back(to_lower_ascii(e), e);
  for (size_t pos = 0; pos < lowered.size();) {
    const std::string* best = nullptr;
    size_t best_len = 0;
    for (const auto& [low, orig] : lowered_entities) {
      if (low.empty() || low.size() > lowered.size() - pos) continue;
      if (low.size() > best_len && lowered.compare(pos, low.size(), low) == 0) {
        best = &orig;
        best_len = low.size();
      }
    }
    if (best) {
      found.insert(*best);
      pos += best_len;
    } else {
      ++pos;
    }
  }
}

}  // namespace

AuxiliaryRecord run_entity(const Prompt& p, const Response& r, const KnowledgeGraph& kg) {
  std::set<std::string> entities;
  detect_entities(p.text, kg, entities);
  detect_entities(r.text, kg, entities);

  AuxiliaryRecord rec;
  rec.kind = BranchKind::Entity;
  size_t fact_count = 0;
  std::string text;
  for (const auto& e : entities) {
    auto items = kg.knowledge_of(e);
    fact_count += items.size();
    if (!text.empty()) text += " ";
    text += e + " [";
    for (size_t i = 0; i < items.size(); ++i) {
      if (i) text += "; ";
      text += items[i];
    }
    text += "]";
  }
  rec.signals["entity_count"] = static_cast<double>(entities.size());
  rec.signals["fact_count"] = static_cast<double>(fact_count);
  rec.text = entities.empty() ? "no entities recognized" : text;
  return rec;
}

AuxiliaryRecord run_factcheck(const Response& r, const ClaimStore& store) {
  size_t matched = 0;
  size_t refuted_hits = 0;
  for (const auto& claim : store.claims()) {
    if (contains_ci(r.text, claim.subject) && contains_ci(r.text, claim.object)) {
      ++matched;
      if (claim.refuted) ++refuted_hits;
    }
  }
  AuxiliaryRecord rec;
  rec.kind = BranchKind::FactCheck;
  rec.signals["matched"] = static_cast<double>(matched);
  rec.signals["refuted_hits"] = static_cast<double>(refuted_hits);
  if (refuted_hits > 0) {
    rec.text = "verification failed; " + std::to_string(refuted_hits) + " of " +
               std::to_string(matched) + " matched claims refuted";
  } else if (matched > 0) {
    rec.text = "verification passed; " + std::to_string(matched) +
               " matched claims consistent with known facts";
  } else {
    rec.text = "verification unverifiable; no known claims matched";
  }
  return rec;
}

namespace {

struct StyleStats {
  double mean_sentence_len = 0.0;
  double ttr = 0.0;
  double marker_ratio = 0.0;
};

StyleStats style_stats(const std::string& text, const FormalLexicon& lexicon) {
  StyleStats s;
  auto sentences = split_sentences(text);
  auto tokens = tokenize(text);
  if (!sentences.empty()) {
    size_t words = 0;
    for (const auto& sentence : sentences) words += tokenize(sentence).size();
    s.mean_sentence_len = static_cast<double>(words) / static_cast<double>(sentences.size());
  }
  s.ttr = distinct1(tokens);
  if (!tokens.empty()) {
    size_t hits = 0;
    for (const auto& t : tokens) hits += lexicon.contains(t) ? 1 : 0;
    s.marker_ratio = static_cast<double>(hits) / static_cast<double>(tokens.size());
  }
  return s;
}

}  // namespace

AuxiliaryRecord run_style(const Prompt& p, const Response& r, const FormalLexicon& lexicon,
                          const BranchThresholds& thresholds) {
  StyleStats sp = style_stats(p.text, lexicon);
  StyleStats sr = style_stats(r.text, lexicon);
  const char* label_p = sp.marker_ratio >= thresholds.formal_marker ? "formal" : "casual";
  const char* label_r = sr.marker_ratio >= thresholds.formal_marker ? "formal" : "casual";
  bool match = std::string(label_p) == label_r;

  AuxiliaryRecord rec;
  rec.kind = BranchKind::Style;
  // ttr is reported for the response text; the prompt's enters via match only.
  rec.signals["prompt_len"] = sp.mean_sentence_len;
  rec.signals["resp_len"] = sr.mean_sentence_len;
  rec.signals["ttr"] = sr.ttr;
  rec.signals["match"] = match ? 1.0 : 0.0;
  rec.text = std::string("style prompt ") + label_p + ", response " + label_r + "; styles " +
             (match ? "match" : "differ");
  return rec;
}

AuxiliaryRecord run_quality(const Response& r, const BranchThresholds& thresholds) {
  auto tokens = tokenize(r.text);
  double d1 = distinct1(tokens);
  double d2 = distinct2(tokens);
  double rep3 = repeated_trigram_fraction(tokens);
  AuxiliaryRecord rec;
  rec.kind = BranchKind::Quality;
  rec.signals["distinct1"] = d1;
  rec.signals["distinct2"] = d2;
  rec.signals["rep3"] = rep3;
  rec.text = "distinct1 " + format_signal(d1) + "; distinct2 " + format_signal(d2) +
             "; rep3 " + format_signal(rep3) + "; " +
             (rep3 > thresholds.repetition ? "repetitive" : "varied");
  return rec;
}

AuxiliaryRecord run_builtin(BranchKind kind, const Prompt& p, const Response& r,
                            const BuiltinResources& resources) {
  switch (kind) {
    case BranchKind::Semantic:
      return run_semantic(p, r, resources.thresholds, resources.embed_dim);
    case BranchKind::Entity:
      return run_entity(p, r, resources.kg);
    case BranchKind::FactCheck:
      return run_factcheck(r, resources.claims);
    case BranchKind::Style:
      return run_style(p, r, resources.lexicon, resources.thresholds);
    case BranchKind::Quality:
      return run_quality(r, resources.thresholds);
  }
  throw ContractError("unknown branch kind");
}

std::string candidate_variant(const std::string& canonical_text, uint64_t seed) {
  if (seed <= 1) return canonical_text;  // first draw is the canonical rendering
  static const std::array<const char*, 4> openers = {"assessment: ", "analysis: ",
                                                     "review: ", "summary: "};
  uint64_t k = seed - 2;
  std::string out = openers[k % openers.size()] + canonical_text;
  if (k >= openers.size()) out += " (draw " + std::to_string(seed) + ")";
  return out;
}

}  // namespace srm
