#pragma once

#include <stdexcept>
#include <string>

namespace posegu {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code)
      : std::runtime_error(what), code_(code) {}

  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Bad command line or configuration values.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(what, ExitCode::kUsage) {}
};

// Malformed, missing or inconsistent input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what, ExitCode::kData) {}
};

// Array shapes that do not agree with each other or with the topology.
class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite values, degenerate geometry, divergence.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(what, ExitCode::kNumerical) {}
};

}  // namespace posegu
