#include "srm/branch/knowledge.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "srm/core/jsonl.hpp"
#include "srm/core/types.hpp"

namespace srm {

using nlohmann::json;

void KnowledgeGraph::add_entity(const std::string& entity) { entities_.insert(entity); }

void KnowledgeGraph::add_edge(const std::string& subject, const std::string& relation,
                              const std::string& object) {
  if (!entities_.count(subject))
    throw ContractError("edge subject '" + subject + "' is not a known entity");
  neighbors_[subject].insert({relation, object});
}

void KnowledgeGraph::add_attribute(const std::string& entity, const std::string& name,
                                   const std::string& value) {
  if (!entities_.count(entity))
    throw ContractError("attribute entity '" + entity + "' is not a known entity");
  attributes_[entity].insert({name, value});
}

std::vector<std::string> KnowledgeGraph::knowledge_of(const std::string& entity) const {
  std::set<std::string> items;
  if (auto it = neighbors_.find(entity); it != neighbors_.end())
    for (const auto& [relation, object] : it->second) items.insert(relation + ": " + object);
  if (auto it = attributes_.find(entity); it != attributes_.end())
    for (const auto& [name, value] : it->second) items.insert(name + ": " + value);
  return {items.begin(), items.end()};
}

KnowledgeGraph KnowledgeGraph::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("knowledge graph JSON: ") + e.what());
  }
  KnowledgeGraph kg;
  for (const auto& e : doc.value("entities", json::array()))
    kg.add_entity(e.get<std::string>());
  for (const auto& edge : doc.value("edges", json::array())) {
    if (!edge.is_array() || edge.size() != 3)
      throw ParseError(1, "knowledge graph edge must be [subject, relation, object]");
    kg.add_edge(edge[0].get<std::string>(), edge[1].get<std::string>(), edge[2].get<std::string>());
  }
  for (const auto& attr : doc.value("attributes", json::array())) {
    if (!attr.is_array() || attr.size() != 3)
      throw ParseError(1, "knowledge graph attribute must be [entity, name, value]");
    kg.add_attribute(attr[0].get<std::string>(), attr[1].get<std::string>(), attr[2].get<std::string>());
  }
  return kg;
}

KnowledgeGraph KnowledgeGraph::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open knowledge graph file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void ClaimStore::add(Claim claim) { claims_.push_back(std::move(claim)); }

ClaimStore ClaimStore::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("claim store JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError(1, "claim store must be a JSON array");
  ClaimStore store;
  for (const auto& c : doc) {
    Claim claim;
    claim.subject = c.at("subject").get<std::string>();
    claim.predicate = c.at("predicate").get<std::string>();
    claim.object = c.at("object").get<std::string>();
    claim.refuted = c.value("refuted", false);
    store.add(std::move(claim));
  }
  return store;
}

ClaimStore ClaimStore::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open claim file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace srm
