#include "vslctm/schedule.hpp"

#include <cmath>
#include <string>

namespace vslctm {

IssueList IncidentSchedule::check() const {
  IssueList issues;
  issues.require(std::isfinite(start) && start >= 0.0, "start", "must be >= 0");
  issues.require(std::isfinite(end) && end > start, "end", "must be > start");
  issues.require(lanes_closed >= 0, "lanes_closed", "must be >= 0");
  return issues;
}

IssueList DemandProfile::check(const std::vector<Step>& steps) {
  IssueList issues;
  if (steps.empty()) {
    issues.add("demand", "must contain at least one step");
    return issues;
  }
  issues.require(steps.front().start == 0.0, "demand[0].start", "must be 0");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string path = "demand[" + std::to_string(i) + "]";
    issues.require(std::isfinite(steps[i].flow) && steps[i].flow >= 0.0, path + ".flow",
                   "must be >= 0");
    if (i > 0) {
      issues.require(steps[i].start > steps[i - 1].start, path + ".start",
                     "must be strictly increasing");
    }
  }
  return issues;
}

DemandProfile::DemandProfile(std::vector<Step> steps) : steps_(std::move(steps)) {
  check(steps_).throw_if_any();
}

double DemandProfile::at(double t) const {
  double flow = steps_.front().flow;
  for (const auto& s : steps_) {
    if (s.start > t) break;
    flow = s.flow;
  }
  return flow;
}

}  // namespace vslctm
