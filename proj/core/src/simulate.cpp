#include "vslctm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace vslctm {
namespace {

constexpr double kTimeEpsilon = 1e-9;

std::size_t step_count(double span, double dt) {
  return static_cast<std::size_t>(std::llround(span / dt));
}

std::string fmt_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double max_stable_dt(const FundamentalDiagram& fd, const NetworkGeometry& geometry) {
  double shortest = geometry.section_length;
  if (geometry.has_zone()) shortest = std::min(shortest, geometry.upstream_zone_length);
  const double fastest =
      std::max({fd.free_flow_speed(), fd.backprop_speed(), fd.outflow_backprop_speed()});
  return shortest / fastest;
}

TrafficState step(const TrafficState& state, const FlowVector& flows,
                  const FundamentalDiagram& fd, const NetworkGeometry& geometry, double dt) {
  const std::size_t n = state.densities.size();
  if (flows.interface.size() != n + 1) {
    throw SimulationError("flow vector does not match the state dimension");
  }
  const double limit = max_stable_dt(fd, geometry);
  if (!(dt > 0.0) || dt > limit * (1.0 + kTimeEpsilon)) {
    std::ostringstream msg;
    msg << "CFL violation: dt = " << dt * 3600.0 << " s exceeds " << limit * 3600.0 << " s";
    throw SimulationError(msg.str());
  }

  TrafficState next = state;
  next.time = state.time + dt;
  if (geometry.has_zone()) {
    next.upstream_density += dt / geometry.upstream_zone_length *
                             (flows.inflow - flows.interface[0]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    next.densities[i] +=
        dt / geometry.section_length * (flows.interface[i] - flows.interface[i + 1]);
  }
  if (!geometry.has_zone()) next.upstream_density = next.densities[0];

  const auto bad = [&](double rho) { return !(rho >= 0.0) || rho > fd.outflow_jam_density(); };
  if (bad(next.upstream_density) || std::any_of(next.densities.begin(), next.densities.end(), bad)) {
    std::ostringstream msg;
    msg << "density left [0, outflow_jam_density] at t = " << next.time << " h";
    throw SimulationError(msg.str());
  }
  return next;
}

TrafficState free_flow_state(const FundamentalDiagram& fd, const NetworkGeometry& geometry,
                             double demand) {
  const double rho = std::min(std::max(demand, 0.0), fd.capacity()) / fd.free_flow_speed();
  TrafficState s;
  s.upstream_density = rho;
  s.densities.assign(static_cast<std::size_t>(geometry.num_sections), rho);
  return s;
}

TrafficState empty_state(const NetworkGeometry& geometry) {
  TrafficState s;
  s.densities.assign(static_cast<std::size_t>(geometry.num_sections), 0.0);
  return s;
}

TrafficState warmup_state(const FundamentalDiagram& fd, const NetworkGeometry& geometry,
                          double demand, double dt) {
  const auto limits = SpeedLimits::uniform(fd.free_flow_speed(),
                                           static_cast<std::size_t>(geometry.num_sections));
  const BottleneckMode open{false, std::nullopt};
  TrafficState state = empty_state(geometry);
  const std::size_t max_steps = step_count(24.0, dt);
  const double scale = std::max(demand, 1.0);
  for (std::size_t k = 0; k < max_steps; ++k) {
    const auto flows = interface_flows(state, limits, fd, geometry, demand, open);
    if (k > 0 && std::abs(flows.inflow - flows.outflow()) <= 1e-10 * scale) break;
    state = step(state, flows, fd, geometry, dt);
  }
  state.time = 0.0;
  return state;
}

std::size_t SimulationTrace::index_at(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t - kTimeEpsilon * dt);
  return static_cast<std::size_t>(it - times.begin());
}

IssueList check_run_config(const RunConfig& c) {
  IssueList issues;
  issues.merge(c.geometry.check(), "geometry");
  issues.merge(DemandProfile::check(c.demand.steps()), "");
  if (c.incident) {
    issues.merge(c.incident->check(), "incident");
    issues.require(c.incident->lanes_closed < c.geometry.lanes_total, "incident.lanes_closed",
                   "must be < lanes_total");
  }
  if (c.lane_change) issues.merge(c.lane_change->check(c.fd), "lane_change");
  issues.require(std::isfinite(c.horizon) && c.horizon >= 0.0, "horizon", "must be >= 0");
  issues.require(std::isfinite(c.dt) && c.dt > 0.0, "dt", "must be > 0");
  issues.require(std::isfinite(c.control_period) && c.control_period > 0.0, "control_period",
                 "must be > 0");
  if (!issues.empty()) return issues;

  const double limit = max_stable_dt(c.fd, c.geometry);
  if (c.dt > limit * (1.0 + kTimeEpsilon)) {
    std::ostringstream msg;
    msg << "CFL violation: dt = " << c.dt * 3600.0 << " s exceeds min(L0, L) / max(v_f, w, w~) = "
        << limit * 3600.0 << " s";
    issues.add("dt", msg.str());
  }
  const double ratio = c.control_period / c.dt;
  issues.require(std::abs(ratio - std::round(ratio)) < 1e-6 && std::round(ratio) >= 1.0,
                 "control_period", "must be a positive integer multiple of dt");
  issues.require(c.initial.densities.size() == static_cast<std::size_t>(c.geometry.num_sections),
                 "initial.densities", "must hold one density per section");
  issues.merge(c.initial.check(c.fd), "initial");
  return issues;
}

SimulationTrace run(const RunConfig& config, Controller& controller) {
  check_run_config(config).throw_if_any();

  const auto& fd = config.fd;
  const auto& g = config.geometry;
  const std::size_t steps = step_count(config.horizon, config.dt);
  const std::size_t control_every = step_count(config.control_period, config.dt);

  SimulationTrace trace;
  trace.geometry = g;
  trace.free_flow_speed = fd.free_flow_speed();
  trace.dt = config.dt;
  trace.controller = controller.name();
  if (config.lane_change && config.incident) {
    trace.lc_distance_m = lc_distance(config.incident->lanes_closed, *config.lane_change);
  }
  trace.times.reserve(steps + 1);
  trace.states.reserve(steps + 1);
  trace.flows.reserve(steps + 1);
  trace.limits.reserve(steps + 1);
  trace.flags.reserve(steps + 1);

  TrafficState state = config.initial;
  state.time = 0.0;
  if (!g.has_zone()) state.upstream_density = state.densities.front();
  SpeedLimits limits;
  bool was_incident = false;

  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    state.time = t;
    const bool incident = config.incident && config.incident->active(t);
    if (incident != was_incident) {
      trace.events.push_back({t, incident ? "incident_start" : "incident_end", ""});
      was_incident = incident;
    }
    if (k % control_every == 0) {
      SpeedLimits next = controller.command(state, t);
      const auto issues = next.check(fd);
      if (!issues.empty() || next.downstream.size() != static_cast<std::size_t>(g.num_sections)) {
        std::string msg = "controller " + controller.name() + " returned invalid limits at t = " +
                          fmt_number(t) + " h";
        for (const auto& s : issues.items()) msg += "; " + s;
        throw SimulationError(msg);
      }
      if (k > 0 && next.v0 != limits.v0) {
        trace.events.push_back(
            {t, "v0_change", fmt_number(limits.v0) + " -> " + fmt_number(next.v0) + " km/h"});
      }
      limits = std::move(next);
    }

    BottleneckMode mode{incident, std::nullopt};
    const bool lc = incident && config.lane_change.has_value();
    if (lc) mode.lc_residual_drop = config.lane_change->residual_drop;

    FlowVector flows = interface_flows(state, limits, fd, g, config.demand.at(t), mode);
    SampleFlags flags{incident, lc,
                      capacity_drop_factor(state.bottleneck_density(), fd, mode) > 0.0};

    trace.times.push_back(t);
    trace.states.push_back(state);
    trace.limits.push_back(limits);
    trace.flags.push_back(flags);
    if (k < steps) state = step(state, flows, fd, g, config.dt);
    trace.flows.push_back(std::move(flows));
  }
  return trace;
}

double VehicleBalance::residual() const {
  return std::abs(stored_final - stored_initial - (entered - exited));
}

VehicleBalance vehicle_balance(const SimulationTrace& trace) {
  VehicleBalance b;
  if (trace.size() == 0) return b;
  b.stored_initial = trace.states.front().stored_vehicles(trace.geometry);
  b.stored_final = trace.states.back().stored_vehicles(trace.geometry);
  // Flows at sample k drive the step to k+1.
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const double dt = trace.times[k + 1] - trace.times[k];
    b.entered += trace.flows[k].inflow * dt;
    b.exited += trace.flows[k].outflow() * dt;
  }
  return b;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace,
                     const std::string& provenance) {
  const int n = trace.geometry.num_sections;
  out << "# " << provenance << "\n";
  out << "# controller=" << trace.controller << " lc_distance_m=" << fmt_number(trace.lc_distance_m)
      << "\n";
  out << "# units: t_min=min rho=veh/km q=veh/h v=km/h\n";
  out << "t_min";
  for (int i = 0; i <= n; ++i) out << ",rho_" << i;
  out << ",q_in";
  for (int i = 1; i <= n + 1; ++i) out << ",q_" << i;
  for (int i = 0; i <= n; ++i) out << ",v_" << i;
  out << ",incident,lane_change,capacity_drop,events\n";

  std::size_t next_event = 0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& s = trace.states[k];
    const auto& q = trace.flows[k];
    const auto& v = trace.limits[k];
    out << fmt_number(trace.times[k] * 60.0) << ',' << fmt_number(s.upstream_density);
    for (double rho : s.densities) out << ',' << fmt_number(rho);
    out << ',' << fmt_number(q.inflow);
    for (double f : q.interface) out << ',' << fmt_number(f);
    out << ',' << fmt_number(v.v0);
    for (double vi : v.downstream) out << ',' << fmt_number(vi);
    const auto& f = trace.flags[k];
    out << ',' << int(f.incident) << ',' << int(f.lane_change) << ',' << int(f.capacity_drop) << ',';
    bool first = true;
    while (next_event < trace.events.size() &&
           trace.events[next_event].time <= trace.times[k] + kTimeEpsilon * trace.dt) {
      if (!first) out << ';';
      out << trace.events[next_event].kind;
      first = false;
      ++next_event;
    }
    out << '\n';
  }
}

}  // namespace vslctm
