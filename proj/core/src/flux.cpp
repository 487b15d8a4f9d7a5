#include "vslctm/flux.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vslctm {
namespace {

double sending(double density, double limit, const FundamentalDiagram& fd) {
  return std::min({limit * density, vsl_max_flow(limit, fd), fd.capacity(),
                   fd.outflow_backprop_speed() * (fd.outflow_jam_density() - density)});
}

double receiving(double density, const FundamentalDiagram& fd) {
  return std::max(0.0, fd.backprop_speed() * (fd.jam_density() - density));
}

}  // namespace

double vsl_max_flow(double speed, const FundamentalDiagram& fd) {
  if (!(speed > 0.0)) {
    throw ValidationError("speed: must be > 0 (got " + std::to_string(speed) + ")");
  }
  const double w = fd.backprop_speed();
  return speed * w * fd.jam_density() / (speed + w);
}

double capacity_drop_factor(double bottleneck_density, const FundamentalDiagram& fd,
                            const BottleneckMode& mode) {
  if (!mode.incident_active) return 0.0;
  if (!(fd.downstream_capacity() < fd.capacity())) return 0.0;
  const double threshold = fd.downstream_capacity() / fd.free_flow_speed();
  if (bottleneck_density <= threshold * (1.0 + kDropActivationTolerance)) return 0.0;
  return mode.lc_residual_drop.value_or(fd.capacity_drop());
}

double bottleneck_outflow(double bottleneck_density, const FundamentalDiagram& fd,
                          const BottleneckMode& mode, std::optional<double> section_limit) {
  if (!(bottleneck_density >= 0.0 && bottleneck_density <= fd.outflow_jam_density())) {
    throw ValidationError("bottleneck_density: must lie in [0, outflow_jam_density] (got " +
                          std::to_string(bottleneck_density) + ")");
  }
  const double limit = section_limit.value_or(fd.free_flow_speed());
  const double cap = mode.incident_active ? fd.downstream_capacity() : fd.capacity();
  const double eps = capacity_drop_factor(bottleneck_density, fd, mode);
  return std::max(0.0, std::min({limit * bottleneck_density, (1.0 - eps) * cap,
                                 fd.outflow_backprop_speed() *
                                     (fd.outflow_jam_density() - bottleneck_density)}));
}

FlowVector interface_flows(const TrafficState& state, const SpeedLimits& limits,
                           const FundamentalDiagram& fd, const NetworkGeometry& geometry,
                           double demand, const BottleneckMode& mode) {
  const std::size_t n = state.densities.size();
  if (n == 0 || limits.downstream.size() != n ||
      n != static_cast<std::size_t>(geometry.num_sections)) {
    throw ValidationError("limits: dimension mismatch (state has " + std::to_string(n) +
                          " sections, limits " + std::to_string(limits.downstream.size()) +
                          ", geometry " + std::to_string(geometry.num_sections) + ")");
  }
  if (!(demand >= 0.0)) throw ValidationError("demand: must be >= 0");

  FlowVector flows;
  flows.interface.resize(n + 1);
  const auto& rho = state.densities;
  const auto& v = limits.downstream;

  if (geometry.has_zone()) {
    const double rho0 = state.upstream_density;
    flows.inflow =
        std::max(0.0, std::min({demand, vsl_max_flow(limits.v0, fd), receiving(rho0, fd)}));
    flows.interface[0] =
        std::max(0.0, std::min({sending(rho0, limits.v0, fd), vsl_max_flow(v[0], fd),
                                receiving(rho[0], fd)}));
  } else {
    flows.interface[0] = std::max(
        0.0, std::min({demand, vsl_max_flow(limits.v0, fd), vsl_max_flow(v[0], fd),
                       fd.capacity(), receiving(rho[0], fd)}));
    flows.inflow = flows.interface[0];
  }

  for (std::size_t i = 1; i < n; ++i) {
    flows.interface[i] = std::max(
        0.0, std::min({sending(rho[i - 1], v[i - 1], fd), vsl_max_flow(v[i], fd),
                       receiving(rho[i], fd)}));
  }
  flows.interface[n] = bottleneck_outflow(rho[n - 1], fd, mode, v[n - 1]);
  return flows;
}

double equilibrium_density(double demand, const FundamentalDiagram& fd) {
  return std::min(std::max(demand, 0.0), fd.downstream_capacity()) / fd.free_flow_speed();
}

}  // namespace vslctm
