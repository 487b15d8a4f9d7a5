#pragma once

#include <vector>

#include "vslctm/fundamental_diagram.hpp"
#include "vslctm/network.hpp"

namespace vslctm {

/// Measured conditions at incident onset t0 that drive the zone-length bound.
struct BoundInputs {
  FundamentalDiagram fd = paper_fundamental_diagram();
  int num_sections = 6;
  double section_length = 1.6;   ///< km
  double v0 = 20.0;              ///< km/h, the held speed in the upstream zone
  double upstream_density = 0.0;  ///< rho0(t0)
  std::vector<double> densities;  ///< rho_1(t0)..rho_N(t0)

  IssueList check() const;
};

/// Free-flow reading of the inputs: every cell (zone included) at d / v_f.
BoundInputs free_flow_bound_inputs(const FundamentalDiagram& fd, const NetworkGeometry& geometry,
                                   double v0, double demand);

/// Result of the L0 lower bound. `raw_km` is the unclamped right-hand side;
/// `km` is max(raw, 0) and `vacuous` marks a clamped (non-positive) bound.
struct ZoneLowerBound {
  double km = 0.0;
  double raw_km = 0.0;
  bool vacuous = false;
};

/// Smallest zone length that lets the held platoon reach the bottleneck only
/// after the pre-incident vehicles are discharged:
///
///   L0 > (v_f sum rho_i - (1-eps0) C_d N) v0 L / (((1-eps0) C_d - v0 rho0) v_f)
///
/// Throws InfeasibleCommand when v0 >= (1-eps0) C_d / rho0.
ZoneLowerBound l0_lower_bound(const BoundInputs& in);

/// T_b = (L0 rho0 + L sum rho_i) / ((1-eps0) C_d), hours.
double time_to_clear(const BoundInputs& in, double zone_length);

/// T_y = L0 / v0 + N L / v_f, hours.
double arrival_time(double zone_length, double v0, int num_sections, double section_length,
                    double free_flow_speed);

enum class ChaseOutcome { absorbed, shockwave_risk };

struct ChasingVerdict {
  ChaseOutcome outcome = ChaseOutcome::shockwave_risk;
  double clear_time = 0.0;    ///< T_b, h
  double arrival_time = 0.0;  ///< T_y, h
};

/// Relative slack used to call T_b and T_y equal.
inline constexpr double kChaseTieTolerance = 1e-12;

/// absorbed iff T_b < T_y strictly; ties within kChaseTieTolerance count as
/// shockwave_risk.
ChasingVerdict chasing_verdict(const BoundInputs& in, double zone_length);

/// v0 < (1-eps0) C_d / rho0; true when rho0 = 0.
bool v0_feasible(const BoundInputs& in);

const char* to_string(ChaseOutcome outcome);

}  // namespace vslctm
