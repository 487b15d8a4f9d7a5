#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vslctm/control.hpp"
#include "vslctm/metrics.hpp"
#include "vslctm/simulate.hpp"
#include "vslctm/zone_bound.hpp"

namespace vslctm {

enum class InitialCondition {
  empty,      ///< every cell at zero density
  free_flow,  ///< every cell at min{d, C} / v_f
  warmup,     ///< filled under the t = 0 demand until balanced
};

const char* to_string(InitialCondition ic);
std::optional<InitialCondition> parse_initial_condition(const std::string& s);

/// Metric settings of a scenario. Speeds in km/h, seed interval in seconds.
struct MetricSettings {
  double seed_interval = 10.0;
  double v_stop = 5.0;
  double v_resume = 10.0;
  /// rho* of the density error; defaults to min{d, C_d} / v_f at incident onset.
  std::optional<double> target_density;
  DensityAggregation aggregation = DensityAggregation::cross_section_average;
  EmissionCurve emission;
  /// Two-column speed/rate CSV; replaces `emission` when set.
  std::optional<std::string> emission_table;

  friend bool operator==(const MetricSettings&, const MetricSettings&) = default;
};

/// Incident window in minutes, as written in scenario files.
struct IncidentWindow {
  double start = 0.0;
  double end = 0.0;
  int lanes_closed = 1;
  friend bool operator==(const IncidentWindow&, const IncidentWindow&) = default;
};

/// VslRuleConfig with its times in minutes.
struct RuleSettings {
  double derating = 0.785;
  double switch_margin = 0.0;  ///< min
  double quantization = 0.0;   ///< km/h
  std::optional<double> switch_delay;  ///< min

  VslRuleConfig to_config() const;
  friend bool operator==(const RuleSettings&, const RuleSettings&) = default;
};

/// Complete run description in file units: minutes for schedule times and
/// the horizon, seconds for dt, the control period and the seed interval.
struct Scenario {
  std::string name;
  FdParams fd = paper_fundamental_diagram().params();
  /// `lanes_closed` follows the incident (0 without one).
  NetworkGeometry geometry;
  std::vector<DemandProfile::Step> demand{{0.0, 0.0}};  ///< step starts in minutes
  std::optional<IncidentWindow> incident;
  ControllerKind controller = ControllerKind::no_control;
  RuleSettings rule;
  std::optional<LcConfig> lane_change;
  double horizon = 90.0;        ///< min
  double dt = 1.0;              ///< s
  double control_period = 30.0;  ///< s
  InitialCondition initial = InitialCondition::warmup;
  MetricSettings metrics;
  std::uint64_t seed = 0;  ///< reserved; runs are deterministic
  /// Zone lengths of the bundled L0 sweep, km. Informational.
  std::vector<double> zone_length_sweep;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Every violated invariant with its field path.
IssueList check_scenario(const Scenario& s);

/// Parses and validates. Throws ParseError for malformed JSON and
/// ValidationError listing every violation.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& s);
void save_scenario(const std::string& path, const Scenario& s);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string scenario_hash(const Scenario& s);

std::vector<std::string> preset_names();
/// One-line summary of a preset.
std::string preset_description(const std::string& name);
/// Throws ValidationError for an unknown name.
Scenario preset(const std::string& name);

/// Demand at t (minutes).
double demand_at(const Scenario& s, double t_min);

/// Core configuration in hours, with the initial state resolved.
RunConfig to_run_config(const Scenario& s);
std::optional<VslSchedule> scenario_schedule(const Scenario& s);
std::unique_ptr<Controller> make_controller(const Scenario& s);
MetricsConfig metrics_config(const Scenario& s);

/// Zone-bound inputs read off a trace at incident onset: measured densities
/// and the congested zone command in force.
BoundInputs bound_inputs_at_onset(const Scenario& s, const SimulationTrace& trace);

struct BoundReport {
  BoundInputs inputs;
  std::optional<ZoneLowerBound> bound;  ///< empty when v0 is infeasible
  std::string infeasible_reason;
  double clear_time = 0.0;    ///< T_b at the scenario's L0, h
  double arrival_time = 0.0;  ///< T_y at the scenario's L0, h
  ChaseOutcome verdict = ChaseOutcome::shockwave_risk;
};

BoundReport evaluate_bound(const BoundInputs& in, double zone_length);

struct ScenarioResult {
  std::string hash;
  SimulationTrace trace;
  MetricsReport metrics;
  std::optional<VslSchedule> schedule;
  /// Present when the scenario has an incident.
  std::optional<BoundReport> bound;
  VehicleBalance balance;
};

ScenarioResult run_scenario(const Scenario& s);

}  // namespace vslctm
