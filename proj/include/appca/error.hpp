#pragma once

#include <stdexcept>
#include <string>

namespace appca {

enum class ErrorKind {
  domain,        // argument outside the operation's domain (bad index, shape)
  data,          // malformed or non-finite input data
  feasibility,   // rank / anchor / overlap requirements not met
  conditioning,  // numerically rank-deficient system
  config,        // invalid simulation or run configuration
  io,            // file system or parse failure
  numerical,     // internal numerical check failed
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class FeasibilityError : public Error {
 public:
  explicit FeasibilityError(const std::string& what)
      : Error(ErrorKind::feasibility, what) {}
};

/// Raised when a least-squares or orthonormalization input is numerically
/// rank deficient. Carries the offending smallest singular value.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double smallest_singular_value)
      : Error(ErrorKind::conditioning, what),
        smallest_singular_value_(smallest_singular_value) {}

  double smallest_singular_value() const noexcept { return smallest_singular_value_; }

 private:
  double smallest_singular_value_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

}  // namespace appca
