#include "srm/service/config.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "srm/branch/embedding.hpp"
#include "srm/core/jsonl.hpp"

namespace srm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Minimal TOML subset: [section] / [dotted.section] headers, `key = value`
// pairs with string/integer/float/boolean values, # comments. Enough for
// the configuration schema; anything else is rejected loudly.
json parse_toml_lite(const std::string& text) {
  json root = json::object();
  json* section = &root;
  std::istringstream in(text);
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    // strip comments outside quotes
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line.erase(i);
        break;
      }
    }
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      size_t e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
      section = &root;
      std::istringstream parts(name);
      std::string part;
      while (std::getline(parts, part, '.')) {
        part = trim(part);
        if (part.empty())
          throw ConfigError("config line " + std::to_string(line_no) + ": empty section segment");
        section = &(*section)[part];
        if (!section->is_object()) *section = json::object();
      }
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");

    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated string");
      (*section)[key] = value.substr(1, value.size() - 2);
    } else if (value == "true" || value == "false") {
      (*section)[key] = (value == "true");
    } else {
      try {
        if (value.find_first_of(".eE") != std::string::npos &&
            value.find_first_not_of("+-0123456789.eE") == std::string::npos) {
          (*section)[key] = std::stod(value);
        } else {
          size_t consumed = 0;
          long long v = std::stoll(value, &consumed);
          if (consumed != value.size()) throw std::invalid_argument(value);
          (*section)[key] = v;
        }
      } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line_no) + ": cannot parse value '" +
                          value + "'");
      }
    }
  }
  return root;
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

AppConfig config_from_json(const json& doc, const std::string& base_dir) {
  AppConfig c;

  const json registry = doc.value("registry", json::object());
  c.concurrency_limit = get_or<int>(registry, "concurrency_limit", c.concurrency_limit);
  c.embed_dim = get_or<size_t>(registry, "embed_dim", c.embed_dim);

  for (BranchKind kind : kAllBranchKinds) c.branches[kind] = AppConfig::BranchEntry{};
  const json branches = doc.value("branches", json::object());
  for (const auto& [name, entry] : branches.items()) {
    auto kind = branch_kind_from_string(name);
    if (!kind) throw ConfigError("unknown branch '" + name + "' in [branches]");
    AppConfig::BranchEntry& b = c.branches[*kind];
    b.backend = get_or<std::string>(entry, "backend", b.backend);
    b.timeout_ms = get_or<int>(entry, "timeout_ms", b.timeout_ms);
    b.host = get_or<std::string>(entry, "host", b.host);
    b.port = get_or<int>(entry, "port", b.port);
    b.path = get_or<std::string>(entry, "path", b.path);
    b.delay_ms = get_or<int>(entry, "delay_ms", b.delay_ms);
    b.scripted_text = get_or<std::string>(entry, "scripted_text", b.scripted_text);
    b.model_file = get_or<std::string>(entry, "model_file", b.model_file);
    if (!b.model_file.empty()) b.model_file = resolve_path(base_dir, b.model_file);
    if (b.backend != "builtin" && b.backend != "scripted" && b.backend != "remote" &&
        b.backend != "trained")
      throw ConfigError("branch '" + name + "': unknown backend '" + b.backend + "'");
    if (b.timeout_ms <= 0) throw ConfigError("branch '" + name + "': timeout_ms must be > 0");
  }

  const json judge = doc.value("judge", json::object());
  c.judge_backend = get_or<std::string>(judge, "backend", c.judge_backend);
  c.tau = get_or<double>(judge, "tau", c.tau);
  c.bon_m = get_or<size_t>(judge, "m", c.bon_m);
  c.judge_concurrency = get_or<int>(judge, "concurrency", c.judge_concurrency);
  c.judge_host = get_or<std::string>(judge, "host", c.judge_host);
  c.judge_port = get_or<int>(judge, "port", c.judge_port);
  c.judge_path = get_or<std::string>(judge, "path", c.judge_path);
  c.judge_timeout_ms = get_or<int>(judge, "timeout_ms", c.judge_timeout_ms);
  if (c.tau < 0.0 || c.tau > 1.0) throw ConfigError("judge tau must be in [0,1]");
  if (c.bon_m < 1) throw ConfigError("judge m must be >= 1");
  if (c.judge_backend != "heuristic" && c.judge_backend != "remote")
    throw ConfigError("unknown judge backend '" + c.judge_backend + "'");

  const json featurizer = doc.value("featurizer", json::object());
  c.features.base_dim = get_or<size_t>(featurizer, "base_dim", c.features.base_dim);
  c.features.sb_text_dim = get_or<size_t>(featurizer, "sb_text_dim", c.features.sb_text_dim);
  c.features.hash_seed = get_or<uint64_t>(featurizer, "hash_seed", c.features.hash_seed);
  if (c.features.base_dim < 2 || c.features.sb_text_dim < 2 || c.embed_dim < 2)
    throw ConfigError("feature and embedding dims must be >= 2");

  const json thresholds = doc.value("thresholds", json::object());
  c.thresholds.similarity_aligned =
      get_or<double>(thresholds, "similarity_aligned", c.thresholds.similarity_aligned);
  c.thresholds.similarity_weak =
      get_or<double>(thresholds, "similarity_weak", c.thresholds.similarity_weak);
  c.thresholds.formal_marker =
      get_or<double>(thresholds, "formal_marker", c.thresholds.formal_marker);
  c.thresholds.repetition = get_or<double>(thresholds, "repetition", c.thresholds.repetition);

  const json lm = doc.value("lm", json::object());
  c.lm_order = get_or<int>(lm, "order", c.lm_order);
  c.lm_alpha = get_or<double>(lm, "alpha", c.lm_alpha);
  c.lm_max_tokens = get_or<size_t>(lm, "max_tokens", c.lm_max_tokens);
  if (c.lm_order < 1) throw ConfigError("lm order must be >= 1");
  if (c.lm_alpha <= 0.0) throw ConfigError("lm alpha must be > 0");

  const json train = doc.value("train", json::object());
  c.train.eta = get_or<double>(train, "eta", c.train.eta);
  c.train.epochs = get_or<int>(train, "epochs", c.train.epochs);
  c.train.l2 = get_or<double>(train, "l2", c.train.l2);
  c.train.batch_size = get_or<int>(train, "batch", c.train.batch_size);
  c.train.shuffle = get_or<bool>(train, "shuffle", c.train.shuffle);

  const json paths = doc.value("paths", json::object());
  c.kg_path = resolve_path(base_dir, get_or<std::string>(paths, "kg", ""));
  c.claims_path = resolve_path(base_dir, get_or<std::string>(paths, "claims", ""));
  c.lexicon_path = resolve_path(base_dir, get_or<std::string>(paths, "lexicon", ""));
  c.train_data = resolve_path(base_dir, get_or<std::string>(paths, "train_data", ""));
  c.eval_data = resolve_path(base_dir, get_or<std::string>(paths, "eval_data", ""));
  c.model_dir = resolve_path(base_dir, get_or<std::string>(paths, "model_dir", c.model_dir));

  const json service = doc.value("service", json::object());
  std::string bind = get_or<std::string>(service, "bind", "");
  if (!bind.empty()) {
    size_t colon = bind.rfind(':');
    if (colon == std::string::npos) throw ConfigError("service bind must be host:port");
    c.bind_host = bind.substr(0, colon);
    try {
      c.bind_port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("service bind port is not a number");
    }
  }

  for (const std::string* path : {&c.kg_path, &c.claims_path, &c.lexicon_path, &c.train_data,
                                  &c.eval_data}) {
    if (!path->empty() && !fs::exists(*path))
      throw ConfigError("configured path does not exist: " + *path);
  }
  return c;
}

}  // namespace

AppConfig AppConfig::from_toml_text(const std::string& text, const std::string& base_dir) {
  AppConfig c = config_from_json(parse_toml_lite(text), base_dir);
  c.config_hash = std::to_string(fnv1a64(text));
  return c;
}

AppConfig AppConfig::from_json_text(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
  AppConfig c = config_from_json(doc, base_dir);
  c.config_hash = std::to_string(fnv1a64(text));
  return c;
}

AppConfig AppConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string base_dir = fs::path(path).parent_path().string();
  if (fs::path(path).extension() == ".json") return from_json_text(ss.str(), base_dir);
  return from_toml_text(ss.str(), base_dir);
}

std::string AppConfig::head_path() const {
  return (fs::path(model_dir) / "head.json").string();
}

std::string AppConfig::lm_path(BranchKind kind) const {
  return (fs::path(model_dir) / ("sb_" + to_string(kind) + ".lm.json")).string();
}

std::shared_ptr<const BuiltinResources> load_builtin_resources(const AppConfig& config) {
  auto resources = std::make_shared<BuiltinResources>();
  if (!config.kg_path.empty()) resources->kg = KnowledgeGraph::from_json_file(config.kg_path);
  if (!config.claims_path.empty())
    resources->claims = ClaimStore::from_json_file(config.claims_path);
  if (!config.lexicon_path.empty())
    resources->lexicon = FormalLexicon::from_file(config.lexicon_path);
  resources->thresholds = config.thresholds;
  resources->embed_dim = config.embed_dim;
  return resources;
}

BranchRegistry build_registry(const AppConfig& config,
                              std::shared_ptr<const BuiltinResources> resources) {
  std::vector<BranchSpec> specs;
  for (const auto& [kind, entry] : config.branches) {
    BranchSpec spec;
    spec.kind = kind;
    spec.timeout = std::chrono::milliseconds(entry.timeout_ms);
    if (entry.backend == "builtin") {
      spec.backend = BuiltinBackend{resources};
    } else if (entry.backend == "scripted") {
      ScriptedBackend scripted;
      AuxiliaryRecord fallback;
      fallback.kind = kind;
      fallback.signals["scripted"] = 1.0;
      fallback.text = entry.scripted_text;
      scripted.fallback = std::move(fallback);
      scripted.delay = std::chrono::milliseconds(entry.delay_ms);
      spec.backend = std::move(scripted);
    } else if (entry.backend == "remote") {
      spec.backend = RemoteBackend{EndpointDescriptor{entry.host, entry.port, entry.path}};
    } else {
      std::string file = entry.model_file.empty() ? config.lm_path(kind) : entry.model_file;
      auto lm = std::make_shared<NgramLM>(NgramLM::load(file));
      spec.backend = TrainedBackend{std::move(lm), config.lm_max_tokens};
    }
    specs.push_back(std::move(spec));
  }
  return BranchRegistry(std::move(specs), config.concurrency_limit);
}

JudgeSpec build_judge_spec(const AppConfig& config) {
  if (config.judge_backend == "remote") {
    RemoteJudge judge;
    judge.endpoint = EndpointDescriptor{config.judge_host, config.judge_port, config.judge_path};
    judge.timeout = std::chrono::milliseconds(config.judge_timeout_ms);
    return JudgeSpec(judge, config.tau);
  }
  return JudgeSpec(HeuristicJudge{}, config.tau);
}

}  // namespace srm
