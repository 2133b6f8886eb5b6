#pragma once

#include <stdexcept>
#include <string>

namespace longi {

/// Base class for every error raised by the toolkit. `kind()` is the short
/// machine-readable tag the CLI puts into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("input", what) {}
};

class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& what) : Error("resolution", what) {}
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error("fit", what) {}
};

class SingularCoefficientError : public Error {
 public:
  explicit SingularCoefficientError(const std::string& what)
      : Error("singular_coefficient", what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error("precondition", what) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error("infeasible", what) {}
};

/// Raised when the Fock truncation is too small for the evolved state.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, int suggested_truncation)
      : Error("truncation", what), suggested_(suggested_truncation) {}
  int suggested_truncation() const noexcept { return suggested_; }

 private:
  int suggested_;
};

/// Configuration problem; `field()` is a JSON pointer to the offending value.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("schema", what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& what) : Error("alignment", what) {}
};

}  // namespace longi
