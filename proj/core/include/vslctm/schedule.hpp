#pragma once

#include <vector>

#include "vslctm/errors.hpp"

namespace vslctm {

/// Lane closure at the bottleneck over [start, end), times in hours.
struct IncidentSchedule {
  double start = 0.0;  ///< t0
  double end = 0.0;    ///< t_e
  int lanes_closed = 1;

  bool active(double t) const noexcept { return t >= start && t < end; }
  IssueList check() const;
  friend bool operator==(const IncidentSchedule&, const IncidentSchedule&) = default;
};

/// Piecewise-constant upstream demand. The first step starts at t = 0.
class DemandProfile {
 public:
  struct Step {
    double start = 0.0;  ///< h
    double flow = 0.0;   ///< veh/h
    friend bool operator==(const Step&, const Step&) = default;
  };

  DemandProfile() = default;
  explicit DemandProfile(std::vector<Step> steps);
  static DemandProfile constant(double flow) { return DemandProfile({{0.0, flow}}); }

  static IssueList check(const std::vector<Step>& steps);

  double at(double t) const;
  const std::vector<Step>& steps() const noexcept { return steps_; }

  friend bool operator==(const DemandProfile&, const DemandProfile&) = default;

 private:
  std::vector<Step> steps_{{0.0, 0.0}};
};

}  // namespace vslctm
