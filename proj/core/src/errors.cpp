#include "vslctm/errors.hpp"

namespace vslctm {
namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out;
  for (const auto& s : issues) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::invalid_argument(join_issues(issues)), issues_(std::move(issues)) {}

void IssueList::merge(const IssueList& other, const std::string& prefix) {
  for (const auto& s : other.items()) {
    issues_.push_back(prefix.empty() ? s : prefix + "." + s);
  }
}

}  // namespace vslctm
