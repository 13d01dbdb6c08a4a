#pragma once

#include <stdexcept>
#include <string>

namespace fudos {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration or argument values (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File system / parsing failures (CLI exit code 3).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Degenerate numerical situations (CLI exit code 4).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fudos
