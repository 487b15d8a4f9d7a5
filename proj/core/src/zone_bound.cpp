#include "vslctm/zone_bound.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace vslctm {
namespace {

double dropped_capacity(const FundamentalDiagram& fd) {
  return (1.0 - fd.capacity_drop()) * fd.downstream_capacity();
}

double density_sum(const BoundInputs& in) {
  return std::accumulate(in.densities.begin(), in.densities.end(), 0.0);
}

void validate(const BoundInputs& in) { in.check().throw_if_any(); }

}  // namespace

IssueList BoundInputs::check() const {
  IssueList issues;
  const double cap = fd.outflow_jam_density();
  issues.require(num_sections >= 1, "num_sections", "must be >= 1");
  issues.require(section_length > 0.0, "section_length", "must be > 0");
  issues.require(v0 > 0.0 && v0 <= fd.free_flow_speed(), "v0",
                 "must lie in (0, free_flow_speed]");
  issues.require(upstream_density >= 0.0 && upstream_density <= cap, "upstream_density",
                 "must lie in [0, outflow_jam_density]");
  issues.require(densities.size() == static_cast<std::size_t>(num_sections), "densities",
                 "must hold one density per section");
  for (std::size_t i = 0; i < densities.size(); ++i) {
    issues.require(densities[i] >= 0.0 && densities[i] <= cap,
                   "densities[" + std::to_string(i) + "]",
                   "must lie in [0, outflow_jam_density]");
  }
  return issues;
}

BoundInputs free_flow_bound_inputs(const FundamentalDiagram& fd, const NetworkGeometry& geometry,
                                   double v0, double demand) {
  const double rho = demand / fd.free_flow_speed();
  BoundInputs in{fd, geometry.num_sections, geometry.section_length, v0, rho, {}};
  in.densities.assign(static_cast<std::size_t>(geometry.num_sections), rho);
  return in;
}

bool v0_feasible(const BoundInputs& in) {
  if (in.upstream_density <= 0.0) return true;
  return in.v0 < dropped_capacity(in.fd) / in.upstream_density;
}

ZoneLowerBound l0_lower_bound(const BoundInputs& in) {
  validate(in);
  const double p = dropped_capacity(in.fd);
  const double denominator = (p - in.v0 * in.upstream_density) * in.fd.free_flow_speed();
  if (!v0_feasible(in) || !(denominator > 0.0)) {
    std::ostringstream msg;
    msg << "v0 = " << in.v0 << " km/h violates v0 < (1-eps0) C_d / rho0 = "
        << (in.upstream_density > 0.0 ? p / in.upstream_density : 0.0)
        << " km/h; no finite zone length absorbs the congestion";
    throw InfeasibleCommand(msg.str());
  }
  const double numerator = (in.fd.free_flow_speed() * density_sum(in) - p * in.num_sections) *
                           in.v0 * in.section_length;
  ZoneLowerBound out;
  out.raw_km = numerator / denominator;
  out.vacuous = !(out.raw_km > 0.0);
  out.km = out.vacuous ? 0.0 : out.raw_km;
  return out;
}

double time_to_clear(const BoundInputs& in, double zone_length) {
  validate(in);
  if (zone_length < 0.0) throw ValidationError("zone_length: must be >= 0");
  const double stored = zone_length * in.upstream_density + in.section_length * density_sum(in);
  return stored / dropped_capacity(in.fd);
}

double arrival_time(double zone_length, double v0, int num_sections, double section_length,
                    double free_flow_speed) {
  if (!(v0 > 0.0)) throw ValidationError("v0: must be > 0");
  return zone_length / v0 + num_sections * section_length / free_flow_speed;
}

ChasingVerdict chasing_verdict(const BoundInputs& in, double zone_length) {
  ChasingVerdict verdict;
  verdict.clear_time = time_to_clear(in, zone_length);
  verdict.arrival_time = arrival_time(zone_length, in.v0, in.num_sections, in.section_length,
                                      in.fd.free_flow_speed());
  const double slack =
      kChaseTieTolerance * std::max(verdict.clear_time, verdict.arrival_time);
  verdict.outcome = verdict.clear_time < verdict.arrival_time - slack
                        ? ChaseOutcome::absorbed
                        : ChaseOutcome::shockwave_risk;
  return verdict;
}

const char* to_string(ChaseOutcome outcome) {
  return outcome == ChaseOutcome::absorbed ? "absorbed" : "shockwave_risk";
}

}  // namespace vslctm
