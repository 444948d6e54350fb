#pragma once

#include <stdexcept>
#include <string>

namespace xtomo {

enum class ErrorCode {
  MissingKey,
  InvalidValue,
  UnknownKey,
  ConflictingKeys,
  IndexOutOfRange,
  Unsupported,
  MalformedHeader,
  SizeMismatch,
  NonFiniteData,
  IoError,
  LengthMismatch,
  SpecMismatch,
  DivergenceDetected,
};

const char* to_string(ErrorCode code);

/// All library failures are reported as this exception; `code()` identifies
/// the failure class so callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace xtomo
