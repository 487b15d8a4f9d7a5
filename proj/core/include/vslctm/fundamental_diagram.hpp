#pragma once

#include "vslctm/errors.hpp"

namespace vslctm {

/// Raw triangular fundamental-diagram parameters. Units: veh/h, km/h, veh/km.
struct FdParams {
  double capacity = 0.0;                ///< C
  double downstream_capacity = 0.0;     ///< C_d, bottleneck capacity during an incident
  double free_flow_speed = 0.0;         ///< v_f
  double backprop_speed = 0.0;          ///< w
  double outflow_backprop_speed = 0.0;  ///< w~, slope of the bounded-acceleration sending branch
  double jam_density = 0.0;             ///< rho^j
  double outflow_jam_density = 0.0;     ///< rho~^j
  double capacity_drop = 0.0;           ///< eps0

  friend bool operator==(const FdParams&, const FdParams&) = default;
};

/// Validated, immutable fundamental diagram.
///
/// Construction enforces positivity, eps0 in (0,1), C_d <= C and the
/// triangle closure v_f rho_c = w (rho^j - rho_c) = w~ (rho~^j - rho_c) = C
/// to a relative tolerance of 1e-6.
class FundamentalDiagram {
 public:
  static constexpr double kTriangleTolerance = 1e-6;

  explicit FundamentalDiagram(const FdParams& p);

  /// Closes both jam densities from C, v_f, w and w~.
  static FundamentalDiagram from_triangle(double capacity, double downstream_capacity,
                                          double free_flow_speed, double backprop_speed,
                                          double outflow_backprop_speed, double capacity_drop);

  /// All violations of the invariants, without throwing.
  static IssueList check(const FdParams& p);

  double capacity() const noexcept { return p_.capacity; }
  double downstream_capacity() const noexcept { return p_.downstream_capacity; }
  double free_flow_speed() const noexcept { return p_.free_flow_speed; }
  double backprop_speed() const noexcept { return p_.backprop_speed; }
  double outflow_backprop_speed() const noexcept { return p_.outflow_backprop_speed; }
  double jam_density() const noexcept { return p_.jam_density; }
  double outflow_jam_density() const noexcept { return p_.outflow_jam_density; }
  double capacity_drop() const noexcept { return p_.capacity_drop; }
  const FdParams& params() const noexcept { return p_; }

  friend bool operator==(const FundamentalDiagram&, const FundamentalDiagram&) = default;

 private:
  FdParams p_;
};

/// The I-710 parameters: C=7200, C_d=4800, v_f=100, w=30, w~=15,
/// rho^j=312, rho~^j=552, eps0=0.1.
FundamentalDiagram paper_fundamental_diagram();

/// C / v_f.
double critical_density(const FundamentalDiagram& fd);

}  // namespace vslctm
