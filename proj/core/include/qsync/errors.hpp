#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qsync {

enum class ErrorKind {
  InvalidArgument,
  NonFinite,
  EmptyHistory,
  WindowTooShort,
  EmptyWindow,
  NonPhysical,
  NoOscillation,
  WindowMismatch,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so that callers (the CLI
// in particular) can map it to an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::string field = {})
      : std::runtime_error(what), kind_(kind), field_(std::move(field)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Name of the offending input field for validation failures, else empty.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

// Integration left the finite range. `time()` is the start of the failing step.
class NonFiniteError : public Error {
 public:
  NonFiniteError(double t, const std::string& what)
      : Error(ErrorKind::NonFinite, what), time_(t) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

// Missing or contradictory configuration. `key()` is the dotted key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(ErrorKind::Config, what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace qsync
