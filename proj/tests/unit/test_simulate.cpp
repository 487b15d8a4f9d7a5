#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "vslctm/flux.hpp"
#include "vslctm/simulate.hpp"

using namespace vslctm;

namespace {

RunConfig base_config(double zone = 0.0, double demand = 5000.0) {
  RunConfig c;
  c.geometry.upstream_zone_length = zone;
  c.demand = DemandProfile::constant(demand);
  c.horizon = 0.5;
  c.initial = empty_state(c.geometry);
  return c;
}

}  // namespace

TEST(Simulate, StableStepByHand) {
  NetworkGeometry g;
  g.upstream_zone_length = 0.8;
  // min(0.8, 1.6) / max(100, 30, 15)
  EXPECT_DOUBLE_EQ(max_stable_dt(paper_fundamental_diagram(), g), 0.008);
}

TEST(Simulate, StepIsExplicitEuler) {
  const auto fd = paper_fundamental_diagram();
  NetworkGeometry g;
  g.num_sections = 2;
  g.upstream_zone_length = 1.0;
  TrafficState s{0.0, 10.0, {20.0, 30.0}};
  FlowVector q{1000.0, {500.0, 800.0, 300.0}};
  const auto n = step(s, q, fd, g, 0.001);
  EXPECT_DOUBLE_EQ(n.upstream_density, 10.0 + 0.001 / 1.0 * 500.0);
  EXPECT_DOUBLE_EQ(n.densities[0], 20.0 + 0.001 / 1.6 * (500.0 - 800.0));
  EXPECT_DOUBLE_EQ(n.densities[1], 30.0 + 0.001 / 1.6 * (800.0 - 300.0));
  EXPECT_THROW(step(s, q, fd, g, 0.02), SimulationError);
}

TEST(Simulate, NegativeDensityIsAnError) {
  const auto fd = paper_fundamental_diagram();
  NetworkGeometry g;
  g.num_sections = 1;
  TrafficState s{0.0, 1.0, {1.0}};
  FlowVector q{0.0, {0.0, 7000.0}};
  EXPECT_THROW(step(s, q, fd, g, 0.01), SimulationError);
}

TEST(Simulate, CflViolationIsValidationError) {
  auto c = base_config();
  c.dt = 120.0 / 3600.0;
  EXPECT_FALSE(check_run_config(c).empty());
  NoControl nc(100.0, 6);
  EXPECT_THROW(run(c, nc), ValidationError);
}

TEST(Simulate, ControlPeriodMustBeMultipleOfDt) {
  auto c = base_config();
  c.control_period = 1.5 / 3600.0;
  EXPECT_FALSE(check_run_config(c).empty());
}

TEST(Simulate, FreeFlowWithoutIncidentStaysPut) {
  const auto fd = paper_fundamental_diagram();
  auto c = base_config(1.6, 5000.0);
  c.initial = free_flow_state(fd, c.geometry, 5000.0);
  NoControl nc(100.0, 6);
  const auto tr = run(c, nc);
  for (double rho : tr.states.back().densities) EXPECT_NEAR(rho, 50.0, 1e-9);
  EXPECT_NEAR(tr.flows.back().outflow(), 5000.0, 1e-9);
}

TEST(Simulate, WarmupReachesDemandEquilibrium) {
  const auto fd = paper_fundamental_diagram();
  NetworkGeometry g;
  g.upstream_zone_length = 2.4;
  const auto s = warmup_state(fd, g, 7000.0, 1.0 / 3600.0);
  EXPECT_NEAR(s.upstream_density, 70.0, 1e-6);
  for (double rho : s.densities) EXPECT_NEAR(rho, 70.0, 1e-6);
}

TEST(Simulate, IncidentWithoutControlQueuesAtTheBottleneck) {
  auto c = base_config(0.0, 7000.0);
  c.incident = IncidentSchedule{0.1, 0.4, 1};
  NoControl nc(100.0, 6);
  const auto tr = run(c, nc);
  const auto k = tr.index_at(0.39);
  EXPECT_GT(tr.states[k].bottleneck_density(), 48.0);
  EXPECT_NEAR(tr.flows[k].outflow(), 4320.0, 1e-9);
  EXPECT_TRUE(tr.flags[k].capacity_drop);
}

TEST(Simulate, EventsAreRecorded) {
  auto c = base_config(1.6, 7000.0);
  c.incident = IncidentSchedule{0.1, 0.3, 1};
  VslSchedule s;
  s.incident_start = 0.1;
  s.switch_time = 0.2;
  s.incident_end = 0.3;
  s.v0_congested = 20.0;
  s.v0_cleared = 25.0;
  s.num_sections = 6;
  RuleBasedController rc(s);
  const auto tr = run(c, rc);
  std::vector<std::string> kinds;
  for (const auto& e : tr.events) kinds.push_back(e.kind);
  EXPECT_EQ(kinds, (std::vector<std::string>{"incident_start", "v0_change", "v0_change",
                                             "incident_end", "v0_change"}));
}

// Cumulative balance holds for arbitrary controllers and demand steps.
class RandomController final : public Controller {
 public:
  explicit RandomController(unsigned seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  SpeedLimits command(const TrafficState& m, double) override {
    std::uniform_real_distribution<double> u(5.0, 100.0);
    SpeedLimits v;
    v.v0 = u(rng_);
    for (std::size_t i = 0; i < m.densities.size(); ++i) v.downstream.push_back(u(rng_));
    return v;
  }

 private:
  std::mt19937 rng_;
};

TEST(Simulate, ConservationUnderRandomControl) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    RunConfig c;
    c.geometry.num_sections = 1 + trial % 7;
    c.geometry.upstream_zone_length = trial % 3 == 0 ? 0.0 : 0.5 + 3.0 * u(rng);
    c.demand = DemandProfile({{0.0, 8000.0 * u(rng)}, {0.2, 8000.0 * u(rng)}});
    c.incident = IncidentSchedule{0.05, 0.3, 1};
    if (trial % 2) c.lane_change = LcConfig{800.0, 0.05 * u(rng)};
    c.horizon = 0.5;
    c.initial = empty_state(c.geometry);
    RandomController rc(static_cast<unsigned>(trial));
    const auto tr = run(c, rc);
    const auto b = vehicle_balance(tr);
    EXPECT_LE(b.residual(), 1e-9 * std::max(1.0, b.entered));
    for (const auto& s : tr.states) {
      EXPECT_GE(s.upstream_density, 0.0);
      for (double rho : s.densities) EXPECT_GE(rho, 0.0);
    }
  }
}

TEST(Simulate, InvalidControllerOutputIsSimulationError) {
  class Bad final : public Controller {
   public:
    std::string name() const override { return "bad"; }
    SpeedLimits command(const TrafficState&, double) override {
      return SpeedLimits::uniform(150.0, 6);
    }
  } bad;
  auto c = base_config();
  EXPECT_THROW(run(c, bad), SimulationError);
}

TEST(Simulate, TraceCsvLayout) {
  auto c = base_config(1.6);
  c.horizon = 10.0 / 3600.0;
  NoControl nc(100.0, 6);
  const auto tr = run(c, nc);
  std::ostringstream os;
  write_trace_csv(os, tr, "scenario_hash=abc");
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# scenario_hash=abc");
  std::getline(is, line);
  std::getline(is, line);
  std::getline(is, line);
  EXPECT_EQ(line.rfind("t_min,rho_0,rho_1", 0), 0u);
  EXPECT_NE(line.find("q_in,q_1"), std::string::npos);
  EXPECT_NE(line.find("q_7,v_0"), std::string::npos);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 11);
}
