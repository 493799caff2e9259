#pragma once

#include <stdexcept>
#include <string>

namespace bwet {

/// Base class for every error raised by the library. `kind()` is a short
/// machine-parseable tag used by the CLI when reporting failures.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error("usage", what) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

struct DivergenceError : Error {
  explicit DivergenceError(const std::string& what) : Error("divergence", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace bwet
