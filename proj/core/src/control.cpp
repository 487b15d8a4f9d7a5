#include "vslctm/control.hpp"

#include <cmath>

#include "vslctm/zone_bound.hpp"

namespace vslctm {
namespace {

double matching_speed(double target_flow, const FundamentalDiagram& fd) {
  const double w = fd.backprop_speed();
  const double denominator = w * fd.jam_density() - target_flow;
  if (!(denominator > 0.0)) {
    throw ValidationError(
        "fundamental_diagram: w * jam_density must exceed the target flow of the v0 law");
  }
  return w * target_flow / denominator;
}

}  // namespace

IssueList VslRuleConfig::check() const {
  IssueList issues;
  issues.require(derating > 0.0 && derating <= 1.0, "derating", "must lie in (0, 1]");
  issues.require(switch_margin >= 0.0, "switch_margin", "must be >= 0");
  issues.require(quantization >= 0.0, "quantization", "must be >= 0");
  if (switch_delay) issues.require(*switch_delay >= 0.0, "switch_delay", "must be >= 0");
  return issues;
}

IssueList LcConfig::check(const FundamentalDiagram& fd) const {
  IssueList issues;
  issues.require(xi > 0.0, "xi", "must be > 0");
  issues.require(residual_drop >= 0.0 && residual_drop <= fd.capacity_drop(), "residual_drop",
                 "must lie in [0, capacity_drop]");
  return issues;
}

double cleared_v0(const FundamentalDiagram& fd) {
  return matching_speed(fd.downstream_capacity(), fd);
}

double congested_v0(const FundamentalDiagram& fd) {
  return matching_speed((1.0 - fd.capacity_drop()) * fd.downstream_capacity(), fd);
}

double v0_command(double demand, double bottleneck_density, const FundamentalDiagram& fd) {
  const double cd = fd.downstream_capacity();
  const bool congested = bottleneck_density > cd / fd.free_flow_speed();
  if (demand > cd && !congested) return cleared_v0(fd);
  if (demand >= (1.0 - fd.capacity_drop()) * cd && congested) return congested_v0(fd);
  return fd.free_flow_speed();
}

double shape_command(double raw_v0, const VslRuleConfig& cfg, const FundamentalDiagram& fd) {
  const double vf = fd.free_flow_speed();
  if (raw_v0 >= vf) return vf;
  double v = cfg.derating * raw_v0;
  if (cfg.quantization > 0.0) {
    // 1e-9 absorbs round-off that would otherwise push 25.0 down to 20.0.
    const double steps = std::floor(v / cfg.quantization + 1e-9);
    v = std::max(cfg.quantization, steps * cfg.quantization);
  }
  return std::min(v, vf);
}

VslSchedule make_schedule(const IncidentSchedule& incident, const VslRuleConfig& cfg,
                          const FundamentalDiagram& fd, const NetworkGeometry& geometry,
                          double demand) {
  cfg.check().throw_if_any();
  VslSchedule s;
  s.incident_start = incident.start;
  s.incident_end = incident.end;
  s.free_flow_speed = fd.free_flow_speed();
  s.num_sections = geometry.num_sections;
  const double above = 2.0 * fd.downstream_capacity() / fd.free_flow_speed() + 1.0;
  s.v0_congested = shape_command(v0_command(demand, above, fd), cfg, fd);
  s.v0_cleared = shape_command(v0_command(demand, 0.0, fd), cfg, fd);

  double switch_time = 0.0;
  if (cfg.switch_delay) {
    switch_time = incident.start + *cfg.switch_delay;
  } else {
    const auto in = free_flow_bound_inputs(fd, geometry, s.v0_congested, demand);
    s.predicted_clear_time = time_to_clear(in, geometry.upstream_zone_length);
    switch_time = incident.start + s.predicted_clear_time + cfg.switch_margin;
  }
  if (switch_time >= incident.end) {
    switch_time = incident.end;
    s.switch_clamped = true;
  }
  s.switch_time = switch_time;
  return s;
}

SpeedLimits scheduled_limits(double t, const VslSchedule& s) {
  auto limits = SpeedLimits::uniform(s.free_flow_speed, static_cast<std::size_t>(s.num_sections));
  if (t >= s.incident_start && t < s.switch_time) {
    limits.v0 = s.v0_congested;
  } else if (t >= s.switch_time && t < s.incident_end) {
    limits.v0 = s.v0_cleared;
  }
  return limits;
}

double lc_distance(int lanes_closed, const LcConfig& cfg) {
  return cfg.xi * static_cast<double>(lanes_closed);
}

SpeedLimits NoControl::command(const TrafficState&, double) {
  return SpeedLimits::uniform(vf_, static_cast<std::size_t>(n_));
}

SpeedLimits RuleBasedController::command(const TrafficState&, double t) {
  return scheduled_limits(t, schedule_);
}

ReactiveRuleController::ReactiveRuleController(FundamentalDiagram fd, IncidentSchedule incident,
                                               VslRuleConfig cfg, DemandProfile demand,
                                               int num_sections)
    : fd_(fd), incident_(incident), cfg_(cfg), demand_(std::move(demand)), n_(num_sections) {
  cfg_.check().throw_if_any();
}

SpeedLimits ReactiveRuleController::command(const TrafficState& measured, double t) {
  auto limits = SpeedLimits::uniform(fd_.free_flow_speed(), static_cast<std::size_t>(n_));
  if (incident_.active(t)) {
    const double raw = v0_command(demand_.at(t), measured.bottleneck_density(), fd_);
    limits.v0 = shape_command(raw, cfg_, fd_);
  }
  return limits;
}

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::no_control:
      return "no_control";
    case ControllerKind::rule_based:
      return "rule_based";
    case ControllerKind::rule_based_reactive:
      return "rule_based_reactive";
  }
  return "unknown";
}

std::optional<ControllerKind> parse_controller_kind(const std::string& s) {
  if (s == "no_control") return ControllerKind::no_control;
  if (s == "rule_based") return ControllerKind::rule_based;
  if (s == "rule_based_reactive") return ControllerKind::rule_based_reactive;
  return std::nullopt;
}

}  // namespace vslctm
