#pragma once

#include <chrono>
#include <cstdint>

#include "srm/branch/backend.hpp"
#include "srm/core/types.hpp"

namespace srm {

/// The remote side answered but violated the branch protocol schema.
/// Distinct from timeouts, which degrade instead of failing.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// POST {kind, prompt, response, seed} to the endpoint; expects
/// {kind, signals, text}. Transport failures and timeouts return the
/// degraded record; schema violations throw ProtocolError.
AuxiliaryRecord call_remote(const EndpointDescriptor& endpoint, BranchKind kind,
                            const Prompt& p, const Response& r,
                            std::chrono::milliseconds timeout, uint64_t seed = 0);

}  // namespace srm
