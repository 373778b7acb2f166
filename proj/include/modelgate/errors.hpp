#pragma once

#include <stdexcept>
#include <string>

namespace modelgate {

// Error taxonomy shared by every module. Each failure mode in the public
// contracts maps to exactly one of these, so callers can match on kind()
// without parsing messages.
enum class ErrorKind {
    EmptyDataset,
    SingleClass,
    DomainError,
    SchemaError,
    ConflictError,
    ContaminationError,
    ConfigError,
    IntegrityError,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    static const char* kind_name(ErrorKind k) {
        switch (k) {
            case ErrorKind::EmptyDataset: return "EmptyDataset";
            case ErrorKind::SingleClass: return "SingleClass";
            case ErrorKind::DomainError: return "DomainError";
            case ErrorKind::SchemaError: return "SchemaError";
            case ErrorKind::ConflictError: return "ConflictError";
            case ErrorKind::ContaminationError: return "ContaminationError";
            case ErrorKind::ConfigError: return "ConfigError";
            case ErrorKind::IntegrityError: return "IntegrityError";
        }
        return "Unknown";
    }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace modelgate
