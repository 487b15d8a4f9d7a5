#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "vslctm/flux.hpp"

using namespace vslctm;

namespace {

const FundamentalDiagram kFd = paper_fundamental_diagram();

NetworkGeometry geometry(double zone) {
  NetworkGeometry g;
  g.upstream_zone_length = zone;
  return g;
}

}  // namespace

TEST(Flux, VslMaxFlowHandValues) {
  // v w rho_j / (v + w)
  EXPECT_DOUBLE_EQ(vsl_max_flow(100.0, kFd), 100.0 * 30.0 * 312.0 / 130.0);
  EXPECT_DOUBLE_EQ(vsl_max_flow(100.0, kFd), 7200.0);
  EXPECT_DOUBLE_EQ(vsl_max_flow(20.0, kFd), 20.0 * 30.0 * 312.0 / 50.0);
  EXPECT_THROW(vsl_max_flow(0.0, kFd), ValidationError);
  EXPECT_THROW(vsl_max_flow(-5.0, kFd), ValidationError);
}

TEST(Flux, VslMaxFlowIsIncreasing) {
  double prev = 0.0;
  for (double v = 1.0; v <= 100.0; v += 1.0) {
    const double q = vsl_max_flow(v, kFd);
    EXPECT_GT(q, prev);
    prev = q;
  }
}

TEST(Flux, CapacityDropActivatesAboveBreakpoint) {
  const BottleneckMode incident{true, std::nullopt};
  EXPECT_DOUBLE_EQ(capacity_drop_factor(48.0, kFd, incident), 0.0);
  EXPECT_DOUBLE_EQ(capacity_drop_factor(48.001, kFd, incident), 0.1);
  EXPECT_DOUBLE_EQ(capacity_drop_factor(100.0, kFd, {false, std::nullopt}), 0.0);
  EXPECT_DOUBLE_EQ(capacity_drop_factor(100.0, kFd, {true, 0.02}), 0.02);
}

TEST(Flux, BottleneckOutflowBranches) {
  const BottleneckMode incident{true, std::nullopt};
  // Free flow below the breakpoint: v_f rho.
  EXPECT_DOUBLE_EQ(bottleneck_outflow(30.0, kFd, incident), 3000.0);
  // At the breakpoint the full C_d passes.
  EXPECT_DOUBLE_EQ(bottleneck_outflow(48.0, kFd, incident), 4800.0);
  // Above it the dropped 4320 applies until w~(rho~j - rho) is smaller.
  EXPECT_DOUBLE_EQ(bottleneck_outflow(100.0, kFd, incident), 4320.0);
  EXPECT_DOUBLE_EQ(bottleneck_outflow(500.0, kFd, incident), 15.0 * 52.0);
  // Without the incident the cap is C, then the w~ branch takes over.
  EXPECT_DOUBLE_EQ(bottleneck_outflow(72.0, kFd, {false, std::nullopt}), 7200.0);
  EXPECT_DOUBLE_EQ(bottleneck_outflow(80.0, kFd, {false, std::nullopt}), 15.0 * 472.0);
  EXPECT_THROW(bottleneck_outflow(-1.0, kFd, incident), ValidationError);
  EXPECT_THROW(bottleneck_outflow(600.0, kFd, incident), ValidationError);
}

TEST(Flux, SectionLimitCapsBottleneckSending) {
  EXPECT_DOUBLE_EQ(bottleneck_outflow(40.0, kFd, {true, std::nullopt}, 50.0), 2000.0);
}

TEST(Flux, EquilibriumDensity) {
  EXPECT_DOUBLE_EQ(equilibrium_density(7000.0, kFd), 48.0);
  EXPECT_DOUBLE_EQ(equilibrium_density(3000.0, kFd), 30.0);
}

TEST(Flux, ZoneAdmitsAtMostItsLimitFlow) {
  const auto g = geometry(2.4);
  TrafficState s;
  s.densities.assign(6, 30.0);
  auto limits = SpeedLimits::uniform(100.0, 6);
  limits.v0 = 20.0;
  // Below the limited critical density the zone sends v0 rho0.
  s.upstream_density = 70.0;
  auto q = interface_flows(s, limits, kFd, g, 7000.0, {true, std::nullopt});
  EXPECT_DOUBLE_EQ(q.interface[0], 20.0 * 70.0);
  // Above it the limited capacity v0 w rho^j / (v0 + w) binds.
  s.upstream_density = 200.0;
  q = interface_flows(s, limits, kFd, g, 7000.0, {true, std::nullopt});
  EXPECT_DOUBLE_EQ(q.interface[0], vsl_max_flow(20.0, kFd));
  EXPECT_LE(q.inflow, 30.0 * (312.0 - 200.0) + 1e-9);
}

TEST(Flux, NoZoneInflowMatchesFirstInterface) {
  TrafficState s;
  s.densities.assign(6, 10.0);
  s.upstream_density = 10.0;
  const auto q = interface_flows(s, SpeedLimits::uniform(100.0, 6), kFd, geometry(0.0), 5000.0,
                                 {false, std::nullopt});
  EXPECT_DOUBLE_EQ(q.inflow, q.interface[0]);
  EXPECT_DOUBLE_EQ(q.inflow, 5000.0);
}

// Uncontrolled CTM written out independently: with every limit at v_f the
// controlled flux must reduce to it.
TEST(Flux, AllFreeFlowLimitsReproduceTheUncontrolledModel) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double vf = 100, w = 30, wt = 15, C = 7200, rj = 312, rtj = 552;
  for (int trial = 0; trial < 500; ++trial) {
    TrafficState s;
    s.upstream_density = 300.0 * u(rng);
    for (int i = 0; i < 6; ++i) s.densities.push_back(300.0 * u(rng));
    const double d = 8000.0 * u(rng);
    const bool incident = u(rng) < 0.5;
    const auto q = interface_flows(s, SpeedLimits::uniform(100.0, 6), kFd, geometry(1.6), d,
                                   {incident, std::nullopt});
    const auto send = [&](double r) { return std::min({vf * r, C, wt * (rtj - r)}); };
    const auto recv = [&](double r) { return std::min(C, w * (rj - r)); };
    EXPECT_NEAR(q.inflow, std::min({d, C, recv(s.upstream_density)}), 1e-9);
    EXPECT_NEAR(q.interface[0], std::min(send(s.upstream_density), recv(s.densities[0])), 1e-9);
    for (int i = 1; i < 6; ++i) {
      EXPECT_NEAR(q.interface[i], std::min(send(s.densities[i - 1]), recv(s.densities[i])), 1e-9);
    }
    const double rn = s.densities[5];
    const double cap = incident ? (rn > 48.0 ? 0.9 * 4800.0 : 4800.0) : C;
    EXPECT_NEAR(q.interface[6], std::min({vf * rn, cap, wt * (rtj - rn)}), 1e-9);
  }
}

TEST(Flux, FlowsAreNonNegativeAndBoundedByCapacity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    TrafficState s;
    s.upstream_density = 552.0 * u(rng);
    for (int i = 0; i < 6; ++i) s.densities.push_back(552.0 * u(rng));
    SpeedLimits v = SpeedLimits::uniform(100.0, 6);
    v.v0 = 5.0 + 95.0 * u(rng);
    for (auto& x : v.downstream) x = 5.0 + 95.0 * u(rng);
    const auto q = interface_flows(s, v, kFd, geometry(0.8), 9000.0 * u(rng), {true, 0.0});
    EXPECT_GE(q.inflow, 0.0);
    EXPECT_LE(q.inflow, 7200.0);
    for (double f : q.interface) {
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 7200.0);
    }
  }
}
