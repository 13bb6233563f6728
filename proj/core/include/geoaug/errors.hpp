#pragma once

#include <stdexcept>
#include <string>

namespace geoaug {

/// Error categories. The numeric value is the process exit code used by the CLI.
enum class ErrorKind : int {
  data = 1,
  config = 2,
  numeric = 3,
  provider = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Malformed or out-of-range input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Factorization failures, singular systems, optimizer divergence.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

/// Auxiliary-variable provider failures (I/O, HTTP, malformed responses).
class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& what, int attempts = 0)
      : Error(ErrorKind::provider, what), attempts_(attempts) {}

  /// Requests made before giving up (HTTP provider), 0 otherwise.
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace geoaug
