#include "vslctm/network.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace vslctm {

IssueList NetworkGeometry::check() const {
  IssueList issues;
  issues.require(num_sections >= 1, "num_sections", "must be >= 1");
  issues.require(std::isfinite(section_length) && section_length > 0.0, "section_length",
                 "must be > 0");
  issues.require(std::isfinite(upstream_zone_length) && upstream_zone_length >= 0.0,
                 "upstream_zone_length", "must be >= 0");
  issues.require(lanes_total >= 1, "lanes_total", "must be >= 1");
  issues.require(lanes_closed >= 0 && lanes_closed < lanes_total, "lanes_closed",
                 "must satisfy 0 <= lanes_closed < lanes_total");
  return issues;
}

double TrafficState::stored_vehicles(const NetworkGeometry& g) const {
  const double downstream =
      g.section_length * std::accumulate(densities.begin(), densities.end(), 0.0);
  return g.upstream_zone_length * upstream_density + downstream;
}

IssueList TrafficState::check(const FundamentalDiagram& fd) const {
  IssueList issues;
  const double cap = fd.outflow_jam_density();
  issues.require(std::isfinite(time) && time >= 0.0, "time", "must be >= 0");
  issues.require(upstream_density >= 0.0 && upstream_density <= cap, "upstream_density",
                 "must lie in [0, outflow_jam_density]");
  issues.require(!densities.empty(), "densities", "must not be empty");
  for (std::size_t i = 0; i < densities.size(); ++i) {
    issues.require(densities[i] >= 0.0 && densities[i] <= cap,
                   "densities[" + std::to_string(i) + "]",
                   "must lie in [0, outflow_jam_density]");
  }
  return issues;
}

SpeedLimits SpeedLimits::uniform(double speed, std::size_t num_sections) {
  return SpeedLimits{speed, std::vector<double>(num_sections, speed)};
}

IssueList SpeedLimits::check(const FundamentalDiagram& fd) const {
  IssueList issues;
  const double vf = fd.free_flow_speed();
  issues.require(v0 > 0.0 && v0 <= vf, "v0", "must lie in (0, free_flow_speed]");
  for (std::size_t i = 0; i < downstream.size(); ++i) {
    issues.require(downstream[i] > 0.0 && downstream[i] <= vf,
                   "v[" + std::to_string(i + 1) + "]", "must lie in (0, free_flow_speed]");
  }
  return issues;
}

}  // namespace vslctm
