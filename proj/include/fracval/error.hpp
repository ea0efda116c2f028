#pragma once

#include <stdexcept>
#include <string>

namespace fracval {

/// Invalid or inconsistent input: scenario files, catalogs, laws, partitions.
/// The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A function was called outside its domain (e.g. a quantile of no samples).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// Failure while running or persisting results (I/O, filesystem).
/// The CLI maps it to exit code 3.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fracval
