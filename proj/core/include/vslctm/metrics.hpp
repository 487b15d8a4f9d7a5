#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vslctm/simulate.hpp"

namespace vslctm {

/// Cells at or below this density move at their posted limit.
inline constexpr double kMinSpeedDensity = 1.0;

/// min{q_out / rho, v_limit}; v_limit when rho <= rho_min.
double cell_speed(double density, double outflow, double limit,
                  double min_density = kMinSpeedDensity);

/// Path of one virtual vehicle. `speeds[j]` holds on [times[j], times[j+1]),
/// so `times` and `positions` carry one more entry than `speeds`.
struct VirtualTrajectory {
  double entry_time = 0.0;  ///< h
  std::vector<double> times;
  std::vector<double> positions;  ///< km from the network entrance
  std::vector<double> speeds;     ///< km/h
  std::optional<double> exit_time;

  bool completed() const noexcept { return exit_time.has_value(); }
  double transit_time() const;  ///< h; completed trajectories only
  double distance() const { return positions.empty() ? 0.0 : positions.back() - positions.front(); }
};

/// Seeds a vehicle at the entrance every `seed_interval` (h) while q_in > 0
/// and moves it with the local cell speed until it leaves at L0 + N L or the
/// trace ends.
std::vector<VirtualTrajectory> reconstruct_trajectories(const SimulationTrace& trace,
                                                        double seed_interval);

/// Mean transit time of completed trajectories, minutes. Throws MetricError
/// when none completed.
double att(const std::vector<VirtualTrajectory>& trajectories);

/// Mean count of downward crossings of v_stop, each armed by reaching
/// v_resume since the previous one (or since entry).
double avg_stops(const std::vector<VirtualTrajectory>& trajectories, double v_stop,
                 double v_resume);

/// Emission rate per distance, g/km, as a function of speed (km/h).
using EmissionRate = std::function<double(double)>;

/// rate(v) = a + b / v + c v^2, evaluated at max(v, 1 km/h).
struct EmissionCurve {
  double a = 216.0;
  double b = 3528.0;
  double c = 0.00688;
  double operator()(double speed) const;
  friend bool operator==(const EmissionCurve&, const EmissionCurve&) = default;
};

/// Piecewise-linear lookup, clamped at both ends.
struct EmissionTable {
  std::vector<double> speeds;
  std::vector<double> rates;
  double operator()(double speed) const;
  IssueList check() const;
  friend bool operator==(const EmissionTable&, const EmissionTable&) = default;
};

/// Two-column CSV (speed_kmh, rate_g_per_km), optional header line.
EmissionTable load_emission_table(const std::string& path);

/// sum_i int rate(v_i) v_i dt / sum_i d_i, g/veh/km. Zero with no distance.
double avg_emission(const std::vector<VirtualTrajectory>& trajectories, const EmissionRate& rate);

enum class DensityAggregation {
  cross_section_average,  ///< rho_bar = mean_i rho_i, then the RMS over time
  per_section,            ///< RMS over sections and time
};

/// (1/rho*) sqrt( 1/(t_e - t_s) int_{t_s}^{t_e} (rho_bar - rho*)^2 dtau ),
/// exact for the piecewise-linear interpolant of the sampled densities.
/// Throws MetricError when the window falls outside the trace.
double rrmse_density(const SimulationTrace& trace, double target, double t_start, double t_end,
                     DensityAggregation aggregation = DensityAggregation::cross_section_average);

/// e_rho at or below this classifies the downstream sections as steady.
inline constexpr double kSteadyStateRrmse = 0.25;

struct MetricsConfig {
  double seed_interval = 10.0 / 3600.0;  ///< h
  double v_stop = 5.0;
  double v_resume = 10.0;
  EmissionRate emission = EmissionCurve{};
};

struct MetricsReport {
  std::optional<double> att_min;
  double avg_stops = 0.0;
  double avg_emission = 0.0;  ///< g/veh/km
  std::optional<double> rrmse;
  int vehicles_counted = 0;
  int vehicles_seeded = 0;
};

/// Averages over completed trajectories. `rrmse_window` is (t_s, t_e) in h.
MetricsReport compute_metrics(const SimulationTrace& trace, const MetricsConfig& cfg,
                              double target_density,
                              std::optional<std::pair<double, double>> rrmse_window);

}  // namespace vslctm
