#pragma once

#include <stdexcept>
#include <string>

namespace cropcast {

// Broad failure classes. The CLI maps each to a process exit code.
enum class ErrorKind {
  kInput,    // malformed or missing input data
  kNumeric,  // impossible observation, non-convergence, non-finite values
  kConfig,   // invalid settings or preconditions on arguments
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& message)
      : Error(ErrorKind::kInput, message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorKind::kNumeric, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::kConfig, message) {}
};

// Matrices whose shape disagrees with the declared state/symbol spaces.
// Kept apart from stochasticity violations, which are reported, not thrown.
class StructuralError : public ConfigError {
 public:
  explicit StructuralError(const std::string& message)
      : ConfigError("structural: " + message) {}
};

int exit_code(ErrorKind kind) noexcept;

}  // namespace cropcast
