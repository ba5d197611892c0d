#include "mpsched/errors.hpp"

namespace mpsched {

namespace {

std::string join_issues(const std::vector<FieldIssue>& issues) {
  std::string out = "invalid configuration";
  for (const auto& issue : issues) {
    out += "\n  ";
    out += issue.field;
    out += ": ";
    out += issue.message;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<FieldIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

}  // namespace mpsched
