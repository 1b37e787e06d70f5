#pragma once

#include <stdexcept>
#include <string>

namespace cdaloc {

/// Invalid parameters or configuration (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or inconsistent input data (maps to CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Anchor subset whose linearized trilateration system is rank deficient.
class DegenerateGeometry : public std::runtime_error {
 public:
  explicit DegenerateGeometry(const std::string& what) : std::runtime_error(what) {}
};

/// A metric was requested for a value that does not support it
/// (for example the residual of a degenerate PEL).
class UndefinedMetric : public std::domain_error {
 public:
  explicit UndefinedMetric(const std::string& what) : std::domain_error(what) {}
};

}  // namespace cdaloc
