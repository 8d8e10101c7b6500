#include "srm/branch/remote.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

namespace srm {

using nlohmann::json;

AuxiliaryRecord call_remote(const EndpointDescriptor& endpoint, BranchKind kind,
                            const Prompt& p, const Response& r,
                            std::chrono::milliseconds timeout, uint64_t seed) {
  httplib::Client client(endpoint.host, endpoint.port);
  const auto secs = timeout.count() / 1000;
  const auto usecs = (timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  json request{{"kind", to_string(kind)},
               {"prompt", p.text},
               {"response", r.text},
               {"seed", seed}};

  const auto start = std::chrono::steady_clock::now();
  auto result = client.Post(endpoint.path, request.dump(), "application/json");
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

  if (!result || result->status != 200) {
    bool timed_out = elapsed >= timeout;
    return degraded_record(kind, timed_out);
  }

  json body;
  try {
    body = json::parse(result->body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("remote branch returned malformed JSON: ") + e.what());
  }
  if (!body.is_object() || !body.contains("kind") || !body.contains("signals") ||
      !body.contains("text"))
    throw ProtocolError("remote branch response missing required fields");
  if (!body.at("kind").is_string() || body.at("kind").get<std::string>() != to_string(kind))
    throw ProtocolError("remote branch response kind mismatch");
  if (!body.at("signals").is_object() || body.at("signals").empty())
    throw ProtocolError("remote branch response signals must be a non-empty object");
  if (!body.at("text").is_string())
    throw ProtocolError("remote branch response text must be a string");

  AuxiliaryRecord rec;
  rec.kind = kind;
  for (const auto& [name, value] : body.at("signals").items()) {
    if (!value.is_number()) throw ProtocolError("remote branch signal '" + name + "' is not a number");
    rec.signals[name] = value.get<double>();
  }
  rec.text = body.at("text").get<std::string>();
  return rec;
}

}  // namespace srm
