#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace srm {

/// Static entity knowledge: labels, relation edges and attributes.
/// Supports the K(e) = Neighbor(e) u Attributes(e) lookup.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  void add_entity(const std::string& entity);
  void add_edge(const std::string& subject, const std::string& relation, const std::string& object);
  void add_attribute(const std::string& entity, const std::string& name, const std::string& value);

  const std::set<std::string>& entities() const { return entities_; }

  /// K(e): each neighbor edge and attribute rendered as "name: value",
  /// deduplicated, lexicographic order.
  std::vector<std::string> knowledge_of(const std::string& entity) const;

  static KnowledgeGraph from_json_file(const std::string& path);
  static KnowledgeGraph from_json_text(const std::string& text);

 private:
  std::set<std::string> entities_;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> neighbors_;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> attributes_;
};

/// Known (subject, predicate, object) claims, a subset flagged refuted.
class ClaimStore {
 public:
  struct Claim {
    std::string subject;
    std::string predicate;
    std::string object;
    bool refuted = false;
  };

  void add(Claim claim);
  const std::vector<Claim>& claims() const { return claims_; }
  bool empty() const { return claims_.empty(); }

  static ClaimStore from_json_file(const std::string& path);
  static ClaimStore from_json_text(const std::string& text);

 private:
  std::vector<Claim> claims_;
};

}  // namespace srm
