#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace s3flow {

/// Grid or band limit cannot represent the requested operation.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of the map (non-unit point, chart singularity).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A prescribed function is not strictly positive where it must be.
class PositivityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// |3w| exceeded the exponential clamp.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative solver gave up; carries the best residual norm reached.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// The input violates a theorem hypothesis (degenerate critical point).
class HypothesisViolation : public std::domain_error {
 public:
  HypothesisViolation(const std::string& what, std::vector<std::string> offenders)
      : std::domain_error(what), offenders_(std::move(offenders)) {}
  const std::vector<std::string>& offenders() const noexcept { return offenders_; }

 private:
  std::vector<std::string> offenders_;
};

}  // namespace s3flow
