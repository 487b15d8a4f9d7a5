#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vslctm/errors.hpp"
#include "vslctm/fundamental_diagram.hpp"

namespace vslctm {

/// One steady-state measurement at the bottleneck section.
struct FdObservation {
  double density = 0.0;  ///< veh/km
  double flow = 0.0;     ///< veh/h
  bool incident = false;

  friend bool operator==(const FdObservation&, const FdObservation&) = default;
};

/// The data cannot support a fit (single branch, negative slope, ...).
/// Carries whatever diagnostics were computed before the failure.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CalibrationOptions {
  /// Use this v_f instead of the fitted one. The fitted value is still reported.
  std::optional<double> pinned_free_flow_speed;
  int max_alternations = 5;
  std::size_t min_observations = 30;

  IssueList check() const;
};

struct BranchStats {
  std::size_t count = 0;
  double rms_residual = 0.0;  ///< veh/h
};

struct FitDiagnostics {
  double fitted_free_flow_speed = 0.0;
  bool free_flow_pinned = false;
  int alternations = 0;
  bool converged = false;
  bool outflow_slope_fallback = false;  ///< w~ = w/2
  double split_density = 0.0;           ///< fitted rho_c
  double breakpoint_density = 0.0;      ///< C_d / v_f
  double plateau_end_density = 0.0;     ///< where the discharge plateau meets the w~ branch
  double discharge_flow = 0.0;          ///< (1 - eps0) C_d
  BranchStats free;
  BranchStats congested;
  BranchStats incident_free;
  BranchStats incident_plateau;
  BranchStats incident_outflow;
  std::vector<std::string> notes;
};

struct FdFit {
  FundamentalDiagram fd;
  FitDiagnostics diagnostics;
};

/// Fits a triangular diagram with capacity drop.
///
/// No-incident set: the free/congested split starts at the max-flow
/// observation and alternates with refits of both branches. v_f is the
/// flow-weighted slope through the origin, w the negated LS slope of the
/// congested branch, and C their intersection. Incident set: the
/// discharge plateau is separated by a robust band around its level, the
/// breakpoint is the densest point still on the free-flow line, and w~ is
/// the LS slope beyond the plateau (w/2 if fewer than two points). Jam
/// densities are closed from C.
FdFit fit_fundamental_diagram(std::span<const FdObservation> obs,
                              const CalibrationOptions& opts = {});

/// Slope of the free-flow line through the origin, sum(q) / sum(rho).
double fit_free_flow_speed(std::span<const FdObservation> obs);

/// Synthetic steady-state samples from `fd`. Half the samples have no
/// incident (split evenly between the free and congested branches), half
/// have one (split in thirds over the free, plateau and outflow branches).
/// Each branch grid includes its breakpoints. Flows get multiplicative
/// Gaussian noise of relative std `noise`, clamped at 0.
std::vector<FdObservation> generate_observations(const FundamentalDiagram& fd, std::size_t n,
                                                 double noise, std::uint64_t seed);

/// CSV with header `density,flow,incident`; `#` lines are skipped.
/// The incident column accepts 0/1/true/false.
std::vector<FdObservation> read_observations(std::istream& in);
std::vector<FdObservation> load_observations(const std::string& path);
void write_observations(std::ostream& out, std::span<const FdObservation> obs);

}  // namespace vslctm
