#pragma once

#include <stdexcept>
#include <string>

namespace hdc {

/// Violation of an API precondition (mismatched dimensions, empty inputs,
/// out-of-range arguments). These indicate caller bugs, not bad data.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Problems with external data: dataset tables, manifests, model files.
class DataError : public std::runtime_error {
 public:
  enum class Kind {
    MalformedFile,
    MissingColumns,
    ChecksumMismatch,
    BadMagic,
    BadVersion,
    Truncated,
    Io,
  };

  DataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace hdc
