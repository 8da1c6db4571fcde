#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsvgd {

/// Base class for every error raised by the library. The C API maps each
/// subclass onto a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of matrices or vectors do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A retraction or re-orthonormalization hit a (numerically) rank-deficient matrix.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values or unparseable config text.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Particle state became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : Error("diverged at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsvgd
