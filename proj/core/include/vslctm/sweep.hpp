#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vslctm/scenario.hpp"

namespace vslctm {

enum class SweepVariable { zone_length, demand, derating, lc_residual_drop };

const char* to_string(SweepVariable v);
std::optional<SweepVariable> parse_sweep_variable(const std::string& s);

struct SweepSpec {
  Scenario base;
  SweepVariable variable = SweepVariable::zone_length;
  std::vector<double> values;
  /// Runs are deterministic, so this must be 1.
  int repetitions = 1;
  bool write_traces = false;
};

/// Non-empty values, repetitions == 1 and a valid scenario for every value.
IssueList check_sweep(const SweepSpec& spec);

/// JSON with `base` (a preset name, a scenario file path relative to
/// `base_dir`, or an inline scenario object), `variable`, `values`
/// (defaults to the base's zone_length_sweep for zone_length),
/// `repetitions` and `write_traces`.
SweepSpec parse_sweep_spec(const std::string& text, const std::string& base_dir = ".");
SweepSpec load_sweep_spec(const std::string& path);

/// The base scenario with one variable replaced. A demand value replaces the
/// whole profile with a constant; an eps_LC value enables lane-change control
/// if it was off.
Scenario apply_sweep_value(const Scenario& base, SweepVariable variable, double value);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  std::string hash;
  std::optional<MetricsReport> metrics;
  std::optional<VslSchedule> schedule;
  std::optional<BoundReport> bound;
  double balance_residual = 0.0;
};

struct SweepOptions {
  int jobs = 1;
  /// Per-run trace CSVs go here when the sweep spec asks for them.
  std::string trace_dir = ".";
};

/// VSLCTM_JOBS when set to a positive integer, else the hardware concurrency.
int default_jobs();

/// One row per value, in input order. A failing run marks its row failed
/// and the sweep continues. An infeasible zone command also fails the row
/// but keeps its metrics.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& opts = {});

void write_summary_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows);

}  // namespace vslctm
