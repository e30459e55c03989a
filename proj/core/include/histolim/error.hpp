#pragma once

#include <stdexcept>
#include <string>

namespace histolim {

// Every library failure carries a short machine-parsable code; the CLI maps
// the category onto its exit status.
enum class ErrorCategory { kValidation, kNumeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& message)
      : std::runtime_error(message), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorCategory category_;
  std::string code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message, std::string code = "validation")
      : Error(ErrorCategory::kValidation, std::move(code), message) {}
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& message)
      : Error(ErrorCategory::kValidation, "capacity", message) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message)
      : Error(ErrorCategory::kValidation, "domain", message) {}
};

class PartitionMismatch : public Error {
 public:
  explicit PartitionMismatch(const std::string& message)
      : Error(ErrorCategory::kValidation, "partition_mismatch", message) {}
};

class DegenerateSystem : public Error {
 public:
  explicit DegenerateSystem(const std::string& message)
      : Error(ErrorCategory::kValidation, "degenerate_system", message) {}
};

class Unsupported : public Error {
 public:
  explicit Unsupported(const std::string& message)
      : Error(ErrorCategory::kValidation, "unsupported", message) {}
};

class InvalidCovariance : public Error {
 public:
  explicit InvalidCovariance(const std::string& message)
      : Error(ErrorCategory::kNumeric, "invalid_covariance", message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message, std::string code = "numeric")
      : Error(ErrorCategory::kNumeric, std::move(code), message) {}
};

}  // namespace histolim
