#include "vslctm/fundamental_diagram.hpp"

#include <cmath>
#include <string>

namespace vslctm {

IssueList FundamentalDiagram::check(const FdParams& p) {
  IssueList issues;
  const auto positive = [&](double v, const char* name) {
    issues.require(std::isfinite(v) && v > 0.0, name, "must be finite and > 0");
  };
  positive(p.capacity, "capacity");
  positive(p.downstream_capacity, "downstream_capacity");
  positive(p.free_flow_speed, "free_flow_speed");
  positive(p.backprop_speed, "backprop_speed");
  positive(p.outflow_backprop_speed, "outflow_backprop_speed");
  positive(p.jam_density, "jam_density");
  positive(p.outflow_jam_density, "outflow_jam_density");
  issues.require(p.capacity_drop > 0.0 && p.capacity_drop < 1.0, "capacity_drop",
                 "must lie in (0, 1)");
  if (!issues.empty()) return issues;

  issues.require(p.downstream_capacity <= p.capacity, "downstream_capacity",
                 "must not exceed capacity");

  const double rho_c = p.capacity / p.free_flow_speed;
  const double tol = kTriangleTolerance * p.capacity;
  const double congested = p.backprop_speed * (p.jam_density - rho_c);
  const double outflow = p.outflow_backprop_speed * (p.outflow_jam_density - rho_c);
  issues.require(std::abs(congested - p.capacity) <= tol, "jam_density",
                 "triangle closure w*(rho_j - rho_c) = C violated (got " +
                     std::to_string(congested) + ")");
  issues.require(std::abs(outflow - p.capacity) <= tol, "outflow_jam_density",
                 "triangle closure w~*(rho~_j - rho_c) = C violated (got " +
                     std::to_string(outflow) + ")");
  return issues;
}

FundamentalDiagram::FundamentalDiagram(const FdParams& p) : p_(p) { check(p).throw_if_any(); }

FundamentalDiagram FundamentalDiagram::from_triangle(double capacity, double downstream_capacity,
                                                     double free_flow_speed, double backprop_speed,
                                                     double outflow_backprop_speed,
                                                     double capacity_drop) {
  FdParams p;
  p.capacity = capacity;
  p.downstream_capacity = downstream_capacity;
  p.free_flow_speed = free_flow_speed;
  p.backprop_speed = backprop_speed;
  p.outflow_backprop_speed = outflow_backprop_speed;
  p.capacity_drop = capacity_drop;
  if (free_flow_speed > 0.0 && backprop_speed > 0.0 && outflow_backprop_speed > 0.0) {
    p.jam_density = capacity / free_flow_speed + capacity / backprop_speed;
    p.outflow_jam_density = capacity / free_flow_speed + capacity / outflow_backprop_speed;
  }
  return FundamentalDiagram(p);
}

FundamentalDiagram paper_fundamental_diagram() {
  return FundamentalDiagram(FdParams{7200.0, 4800.0, 100.0, 30.0, 15.0, 312.0, 552.0, 0.1});
}

double critical_density(const FundamentalDiagram& fd) {
  return fd.capacity() / fd.free_flow_speed();
}

}  // namespace vslctm
