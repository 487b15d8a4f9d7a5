#pragma once

#include <memory>
#include <optional>
#include <string>

#include "vslctm/fundamental_diagram.hpp"
#include "vslctm/network.hpp"
#include "vslctm/schedule.hpp"

namespace vslctm {

/// Tuning of the rule-based upstream command.
struct VslRuleConfig {
  /// alpha in (0,1], applied to every controlled (sub-v_f) command.
  double derating = 0.785;
  /// Added to the predicted clearing time T_b to place the switch, h.
  double switch_margin = 0.0;
  /// Commands are rounded down to this grid, km/h; 0 disables.
  double quantization = 0.0;
  /// When set, the switch happens this long after t0 regardless of T_b, h.
  std::optional<double> switch_delay;

  IssueList check() const;
  friend bool operator==(const VslRuleConfig&, const VslRuleConfig&) = default;
};

/// Lane-change advisories upstream of the closure.
struct LcConfig {
  double xi = 800.0;           ///< m per closed lane
  double residual_drop = 0.0;  ///< eps_LC, in [0, eps0]

  IssueList check(const FundamentalDiagram& fd) const;
  friend bool operator==(const LcConfig&, const LcConfig&) = default;
};

/// w C_d / (w rho^j - C_d): the zone limit whose maximum flow equals C_d.
double cleared_v0(const FundamentalDiagram& fd);
/// Same with (1-eps0) C_d: matches the dropped bottleneck discharge.
double congested_v0(const FundamentalDiagram& fd);

/// Three-case upstream command:
///   cleared_v0   if d > C_d and rho_N <= C_d / v_f
///   congested_v0 if d >= (1-eps0) C_d and rho_N > C_d / v_f
///   v_f          otherwise
/// Throws ValidationError when w rho^j <= C_d.
double v0_command(double demand, double bottleneck_density, const FundamentalDiagram& fd);

/// Applies alpha (to controlled commands only) and the quantization grid.
double shape_command(double raw_v0, const VslRuleConfig& cfg, const FundamentalDiagram& fd);

/// Precomputed open-loop schedule: congested command on [t0, t_s), cleared
/// command on [t_s, t_e), v_f elsewhere. Downstream limits stay at v_f.
struct VslSchedule {
  double incident_start = 0.0;
  double switch_time = 0.0;
  double incident_end = 0.0;
  double v0_congested = 0.0;
  double v0_cleared = 0.0;
  double free_flow_speed = 100.0;
  int num_sections = 1;
  /// T_b used to place the switch (h); zero when switch_delay overrides it.
  double predicted_clear_time = 0.0;
  /// t0 + T_b + margin reached t_e and was clamped.
  bool switch_clamped = false;
};

VslSchedule make_schedule(const IncidentSchedule& incident, const VslRuleConfig& cfg,
                          const FundamentalDiagram& fd, const NetworkGeometry& geometry,
                          double demand);

SpeedLimits scheduled_limits(double t, const VslSchedule& schedule);

/// d_LC = xi n, metres.
double lc_distance(int lanes_closed, const LcConfig& cfg);

/// Pluggable speed-limit strategy consulted once per control period.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual SpeedLimits command(const TrafficState& measured, double t) = 0;
};

/// Every limit at v_f.
class NoControl final : public Controller {
 public:
  NoControl(double free_flow_speed, int num_sections)
      : vf_(free_flow_speed), n_(num_sections) {}
  std::string name() const override { return "no_control"; }
  SpeedLimits command(const TrafficState& measured, double t) override;

 private:
  double vf_;
  int n_;
};

/// Open-loop schedule.
class RuleBasedController final : public Controller {
 public:
  explicit RuleBasedController(VslSchedule schedule) : schedule_(schedule) {}
  std::string name() const override { return "rule_based"; }
  SpeedLimits command(const TrafficState& measured, double t) override;
  const VslSchedule& schedule() const noexcept { return schedule_; }

 private:
  VslSchedule schedule_;
};

/// Re-evaluates the three-case law on the measured rho_N during the incident.
class ReactiveRuleController final : public Controller {
 public:
  ReactiveRuleController(FundamentalDiagram fd, IncidentSchedule incident, VslRuleConfig cfg,
                         DemandProfile demand, int num_sections);
  std::string name() const override { return "rule_based_reactive"; }
  SpeedLimits command(const TrafficState& measured, double t) override;

 private:
  FundamentalDiagram fd_;
  IncidentSchedule incident_;
  VslRuleConfig cfg_;
  DemandProfile demand_;
  int n_;
};

enum class ControllerKind { no_control, rule_based, rule_based_reactive };

const char* to_string(ControllerKind kind);
std::optional<ControllerKind> parse_controller_kind(const std::string& s);

}  // namespace vslctm
