#pragma once

#include <optional>

#include "vslctm/fundamental_diagram.hpp"
#include "vslctm/network.hpp"

namespace vslctm {

/// Bottleneck regime at the downstream end of section N.
struct BottleneckMode {
  /// Lane closure active: discharge capped at C_d and subject to the
  /// capacity drop. Otherwise the cap is C and eps = 0.
  bool incident_active = true;
  /// Residual drop eps_LC while lane-change control is active; replaces eps0.
  std::optional<double> lc_residual_drop;
};

/// Relative slack on the C_d/v_f activation threshold of the capacity drop.
/// Keeps a section that settles onto C_d/v_f from below from tripping the
/// drop through round-off.
inline constexpr double kDropActivationTolerance = 1e-9;

/// Highest flow a speed limit v admits on the triangular diagram:
/// v w rho^j / (v + w). Equals C at v = v_f.
double vsl_max_flow(double speed, const FundamentalDiagram& fd);

/// eps(rho_N): eps0 (or eps_LC) when C_d < C and rho_N > C_d / v_f during an
/// incident, else 0.
double capacity_drop_factor(double bottleneck_density, const FundamentalDiagram& fd,
                            const BottleneckMode& mode);

/// q_{N+1} = min{v_N rho_N, (1 - eps(rho_N)) C_b, w~ (rho~^j - rho_N)} with
/// C_b = C_d during an incident and C otherwise.
double bottleneck_outflow(double bottleneck_density, const FundamentalDiagram& fd,
                          const BottleneckMode& mode, std::optional<double> section_limit = {});

/// All interface flows of the VSL-controlled CTM for the current state.
///
/// The zone (cell 0, length L0, limit v0) sends q_1; q_in is the demand it
/// admits. Without a zone q_1 = min{d, f(v0), f(v1), C, w(rho^j - rho_1)}
/// and q_in = q_1. Interior sending functions keep the C and w~ terms of the
/// uncontrolled model so that all-v_f limits reproduce it exactly.
FlowVector interface_flows(const TrafficState& state, const SpeedLimits& limits,
                           const FundamentalDiagram& fd, const NetworkGeometry& geometry,
                           double demand, const BottleneckMode& mode);

/// min{d, C_d} / v_f, the uniform equilibrium the closed loop converges to.
double equilibrium_density(double demand, const FundamentalDiagram& fd);

}  // namespace vslctm
