#include "srm/core/jsonl.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "srm/core/text.hpp"

namespace srm {

using nlohmann::json;

std::string segment_separator(const std::string& label) {
  return "\n[SEG:" + label + "]\n";
}

std::string branch_segment_label(BranchKind kind) {
  std::string name = to_string(kind);
  for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return "SB:" + name;
}

std::string escape_segment(std::string_view text) {
  static const std::string needle = "[SEG:";
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, needle.size(), needle) == 0) {
      out += "[SEG\\:";
      i += needle.size();
    } else {
      out.push_back(text[i]);
      ++i;
    }
  }
  return out;
}

std::string canonical_concat(const EnhancedInput& x) {
  std::string out = escape_segment(x.prompt().text);
  out += segment_separator("RESPONSE");
  out += escape_segment(x.response().text);
  for (const auto& rec : x.auxiliaries()) {
    out += segment_separator(branch_segment_label(rec.kind));
    out += escape_segment(rec.text);
  }
  return out;
}

namespace {

json auxiliary_to_json(const AuxiliaryRecord& rec) {
  json signals = json::object();
  for (const auto& [name, value] : rec.signals) signals[name] = value;
  return json{{"kind", to_string(rec.kind)}, {"signals", signals}, {"text", rec.text}};
}

AuxiliaryRecord auxiliary_from_json(const json& j, size_t line) {
  if (!j.is_object()) throw ParseError(line, "auxiliary must be an object");
  for (const char* field : {"kind", "signals", "text"})
    if (!j.contains(field)) throw ParseError(line, std::string("auxiliary missing field '") + field + "'");
  auto kind = branch_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw ParseError(line, "unknown branch kind '" + j.at("kind").get<std::string>() + "'");
  AuxiliaryRecord rec;
  rec.kind = *kind;
  if (!j.at("signals").is_object()) throw ParseError(line, "auxiliary signals must be an object");
  for (const auto& [name, value] : j.at("signals").items()) {
    if (!value.is_number()) throw ParseError(line, "signal '" + name + "' is not a number");
    rec.signals[name] = value.get<double>();
  }
  if (rec.signals.empty()) throw ParseError(line, "auxiliary signals map is empty");
  rec.text = j.at("text").get<std::string>();
  return rec;
}

std::string require_string(const json& j, const char* field, size_t line) {
  if (!j.contains(field)) throw ParseError(line, std::string("missing field '") + field + "'");
  if (!j.at(field).is_string()) throw ParseError(line, std::string("field '") + field + "' is not a string");
  return j.at(field).get<std::string>();
}

}  // namespace

size_t serialize_dataset(const std::vector<PreferenceExample>& examples, std::ostream& sink) {
  size_t count = 0;
  for (const auto& ex : examples) {
    json row{{"id", ex.prompt.id},
             {"prompt", ex.prompt.text},
             {"chosen", ex.chosen.text},
             {"rejected", ex.rejected.text}};
    sink << row.dump() << '\n';
    if (!sink) throw IoError("write failure at record " + std::to_string(count));
    ++count;
  }
  return count;
}

std::vector<PreferenceExample> parse_dataset(std::istream& source) {
  std::vector<PreferenceExample> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!has_visible_text(line)) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    PreferenceExample ex;
    ex.prompt.id = require_string(row, "id", line_no);
    ex.prompt.text = require_string(row, "prompt", line_no);
    ex.chosen.text = require_string(row, "chosen", line_no);
    ex.rejected.text = require_string(row, "rejected", line_no);
    try {
      validate(ex);
    } catch (const ContractError& e) {
      throw ParseError(line_no, e.what());
    }
    out.push_back(std::move(ex));
  }
  return out;
}

size_t serialize_curation(const std::vector<CandidateTriple>& candidates, std::ostream& sink) {
  size_t count = 0;
  for (const auto& c : candidates) {
    json row{{"id", c.prompt.id},
             {"prompt", c.prompt.text},
             {"response", c.response.text},
             {"auxiliary", auxiliary_to_json(c.auxiliary)}};
    row["judge_score"] = c.judge_score ? json(*c.judge_score) : json(nullptr);
    sink << row.dump() << '\n';
    if (!sink) throw IoError("write failure at record " + std::to_string(count));
    ++count;
  }
  return count;
}

std::vector<CandidateTriple> parse_curation(std::istream& source) {
  std::vector<CandidateTriple> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!has_visible_text(line)) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    CandidateTriple c;
    c.prompt.id = require_string(row, "id", line_no);
    c.prompt.text = require_string(row, "prompt", line_no);
    c.response.text = require_string(row, "response", line_no);
    if (!row.contains("auxiliary")) throw ParseError(line_no, "missing field 'auxiliary'");
    c.auxiliary = auxiliary_from_json(row.at("auxiliary"), line_no);
    if (row.contains("judge_score") && !row.at("judge_score").is_null()) {
      if (!row.at("judge_score").is_number())
        throw ParseError(line_no, "judge_score must be a number or null");
      double q = row.at("judge_score").get<double>();
      if (q < 0.0 || q > 1.0) throw ParseError(line_no, "judge_score outside [0,1]");
      c.judge_score = q;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<PreferenceExample> load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  return parse_dataset(in);
}

void save_dataset_file(const std::vector<PreferenceExample>& examples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open dataset file for writing: " + path);
  serialize_dataset(examples, out);
}

void save_curation_file(const std::vector<CandidateTriple>& candidates, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open curation file for writing: " + path);
  serialize_curation(candidates, out);
}

std::vector<CandidateTriple> load_curation_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open curation file: " + path);
  return parse_curation(in);
}

}  // namespace srm
