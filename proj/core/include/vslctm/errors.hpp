#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vslctm {

/// Invalid parameters or inputs. Carries every violation found, each
/// prefixed with the offending field path.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  explicit ValidationError(std::string issue)
      : ValidationError(std::vector<std::string>{std::move(issue)}) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Malformed input file (JSON or CSV).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised while advancing the model: CFL violation, negative density,
/// controller output out of range.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The upstream speed command admits no finite zone length
/// (v0 >= (1 - eps0) C_d / rho0).
class InfeasibleCommand : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A metric has no defined value for the given input (e.g. no vehicle
/// completed its trip).
class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Collects validation issues and throws them all at once.
class IssueList {
 public:
  IssueList() = default;
  /// Adopts already formatted "path: message" lines.
  explicit IssueList(std::vector<std::string> lines) : issues_(std::move(lines)) {}

  void add(std::string path, std::string message) {
    issues_.push_back(path + ": " + message);
  }
  void require(bool ok, const std::string& path, const std::string& message) {
    if (!ok) add(path, message);
  }
  void merge(const IssueList& other, const std::string& prefix);
  bool empty() const noexcept { return issues_.empty(); }
  const std::vector<std::string>& items() const noexcept { return issues_; }
  void throw_if_any() const {
    if (!issues_.empty()) throw ValidationError(issues_);
  }

 private:
  std::vector<std::string> issues_;
};

}  // namespace vslctm
