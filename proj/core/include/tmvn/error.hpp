#pragma once

#include <stdexcept>
#include <string>

namespace tmvn {

// Coarse classification used by the CLI to choose an exit code.
enum class ErrorCategory { Usage, Numerical, Budget };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCategory::Usage, "InvalidArgument: " + what) {}
};

/// An interval [a, b] with a >= b, or one whose normal mass vanishes.
class DegenerateInterval : public Error {
 public:
  explicit DegenerateInterval(const std::string& what)
      : Error(ErrorCategory::Usage, "DegenerateInterval: " + what) {}
};

class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& what)
      : Error(ErrorCategory::Numerical, "RankDeficient: " + what) {}
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(const std::string& what)
      : Error(ErrorCategory::Numerical, "NotPositiveDefinite: " + what) {}
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(const std::string& what)
      : Error(ErrorCategory::Numerical, "NoConvergence: " + what) {}
};

class EnvelopeViolation : public Error {
 public:
  explicit EnvelopeViolation(const std::string& what)
      : Error(ErrorCategory::Numerical, "EnvelopeViolation: " + what) {}
};

class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& what)
      : Error(ErrorCategory::Budget, "BudgetExceeded: " + what) {}
};

class Overflow : public Error {
 public:
  explicit Overflow(const std::string& what)
      : Error(ErrorCategory::Numerical, "Overflow: " + what) {}
};

}  // namespace tmvn
