#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vslctm/control.hpp"
#include "vslctm/flux.hpp"
#include "vslctm/network.hpp"
#include "vslctm/schedule.hpp"

namespace vslctm {

/// Physical and numerical inputs of one run. Times in hours.
struct RunConfig {
  FundamentalDiagram fd = paper_fundamental_diagram();
  NetworkGeometry geometry;
  DemandProfile demand;
  std::optional<IncidentSchedule> incident;
  /// Lane-change control; active exactly while the incident is.
  std::optional<LcConfig> lane_change;
  double horizon = 1.5;
  double dt = 1.0 / 3600.0;
  double control_period = 30.0 / 3600.0;
  TrafficState initial;
};

/// Largest stable step: min(L0 if present, L) / max(v_f, w, w~), hours.
double max_stable_dt(const FundamentalDiagram& fd, const NetworkGeometry& geometry);

/// Explicit Euler update rho_i += dt / L_i (q_i - q_{i+1}), zone included.
/// Throws SimulationError on CFL violation or a negative density.
TrafficState step(const TrafficState& state, const FlowVector& flows,
                  const FundamentalDiagram& fd, const NetworkGeometry& geometry, double dt);

/// Every cell at min{d, C} / v_f.
TrafficState free_flow_state(const FundamentalDiagram& fd, const NetworkGeometry& geometry,
                             double demand);
TrafficState empty_state(const NetworkGeometry& geometry);

/// Fills an empty network under constant demand with no incident and no
/// control until inflow and outflow balance (relative 1e-10) or 24 h elapse.
TrafficState warmup_state(const FundamentalDiagram& fd, const NetworkGeometry& geometry,
                          double demand, double dt);

struct SampleFlags {
  bool incident = false;
  bool lane_change = false;
  bool capacity_drop = false;
  friend bool operator==(const SampleFlags&, const SampleFlags&) = default;
};

struct TraceEvent {
  double time = 0.0;  ///< h
  std::string kind;   ///< incident_start, incident_end, v0_change
  std::string detail;
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// Time series produced by run(). All per-sample vectors share one length.
struct SimulationTrace {
  NetworkGeometry geometry;
  double free_flow_speed = 100.0;
  double dt = 0.0;
  std::string controller;
  /// d_LC recorded for the run, metres; zero without lane-change control.
  double lc_distance_m = 0.0;

  std::vector<double> times;
  std::vector<TrafficState> states;
  std::vector<FlowVector> flows;
  std::vector<SpeedLimits> limits;
  std::vector<SampleFlags> flags;
  std::vector<TraceEvent> events;

  std::size_t size() const noexcept { return times.size(); }
  /// Index of the first sample at or after t (size() if none).
  std::size_t index_at(double t) const;
  friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;
};

/// Advances the model over [0, horizon] consulting `controller` every
/// control period. Throws ValidationError for a bad config and
/// SimulationError for numerical failures or invalid controller output.
SimulationTrace run(const RunConfig& config, Controller& controller);

IssueList check_run_config(const RunConfig& config);

/// Cumulative vehicle accounting over a trace, vehicles.
struct VehicleBalance {
  double entered = 0.0;
  double exited = 0.0;
  double stored_initial = 0.0;
  double stored_final = 0.0;
  /// |stored_final - stored_initial - (entered - exited)|
  double residual() const;
};

VehicleBalance vehicle_balance(const SimulationTrace& trace);

/// Plot-ready CSV, one row per sample, preceded by comment lines carrying
/// `provenance` and the column units.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace,
                     const std::string& provenance);

}  // namespace vslctm
