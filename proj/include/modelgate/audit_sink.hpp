#pragma once

#include <string>

#include <json.hpp>

namespace modelgate {

// Append-only sink the decision engine writes through. Composing a decision
// record and persisting it are one transaction: if the sink throws, the
// decision is not issued.
struct AuditSink {
    virtual ~AuditSink() = default;
    virtual void append(const std::string& kind, const nlohmann::json& payload) = 0;
};

} // namespace modelgate
