#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpsched {

struct FieldIssue {
  std::string field;
  std::string message;
};

/// Invalid configuration. Carries one entry per offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<FieldIssue> issues);
  ConfigError(std::string field, std::string message)
      : ConfigError(std::vector<FieldIssue>{{std::move(field), std::move(message)}}) {}
  const std::vector<FieldIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<FieldIssue> issues_;
};

/// A parameter combination with no valid stochastic model behind it.
class InfeasibleParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation requested on a link type that does not support it.
class ModelMismatchError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// State space larger than the configured safety limit.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a precondition (mismatched policy, empty sample, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double residual, std::size_t iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

}  // namespace mpsched
