#pragma once

#include <cstddef>
#include <vector>

#include "vslctm/errors.hpp"
#include "vslctm/fundamental_diagram.hpp"

namespace vslctm {

/// Freeway stretch: an upstream VSL zone of length L0 (cell 0) followed by
/// N homogeneous sections of length L ending at the bottleneck.
struct NetworkGeometry {
  int num_sections = 6;
  double section_length = 1.6;        ///< km
  double upstream_zone_length = 0.0;  ///< km, L0; 0 means no explicit zone cell
  int lanes_total = 3;
  int lanes_closed = 1;

  bool has_zone() const noexcept { return upstream_zone_length > 0.0; }
  /// L0 + N L
  double total_length() const noexcept {
    return upstream_zone_length + num_sections * section_length;
  }

  IssueList check() const;
  friend bool operator==(const NetworkGeometry&, const NetworkGeometry&) = default;
};

/// Densities at one instant. `upstream_density` is the zone cell rho0; when
/// the geometry has no zone it mirrors rho_1.
struct TrafficState {
  double time = 0.0;  ///< h
  double upstream_density = 0.0;
  std::vector<double> densities;  ///< rho_1..rho_N, veh/km

  std::size_t num_sections() const noexcept { return densities.size(); }
  double bottleneck_density() const { return densities.back(); }

  /// Vehicles stored in the network: L0 rho0 + L sum(rho_i).
  double stored_vehicles(const NetworkGeometry& g) const;

  IssueList check(const FundamentalDiagram& fd) const;
  friend bool operator==(const TrafficState&, const TrafficState&) = default;
};

/// Actuation vector: v0 for the zone and v_1..v_N for the sections (km/h).
struct SpeedLimits {
  double v0 = 0.0;
  std::vector<double> downstream;

  /// Every limit at v_f.
  static SpeedLimits uniform(double speed, std::size_t num_sections);

  IssueList check(const FundamentalDiagram& fd) const;
  friend bool operator==(const SpeedLimits&, const SpeedLimits&) = default;
};

/// q_in (admitted into the zone) and the interface flows q_1..q_{N+1} (veh/h).
struct FlowVector {
  double inflow = 0.0;
  std::vector<double> interface;  ///< size N+1; interface[i] is q_{i+1}

  double outflow() const { return interface.back(); }
  friend bool operator==(const FlowVector&, const FlowVector&) = default;
};

}  // namespace vslctm
