#include <gtest/gtest.h>

#include <random>

#include "vslctm/zone_bound.hpp"

using namespace vslctm;

namespace {

BoundInputs high_demand(double v0 = 20.0) {
  NetworkGeometry g;
  return free_flow_bound_inputs(paper_fundamental_diagram(), g, v0, 7000.0);
}

}  // namespace

TEST(ZoneBound, FreeFlowHighDemandByHand) {
  // (100 * 6 * 70 - 4320 * 6) * 20 * 1.6 / ((4320 - 20 * 70) * 100) = 514560 / 292000
  const auto b = l0_lower_bound(high_demand());
  EXPECT_NEAR(b.km, 514560.0 / 292000.0, 1e-12);
  EXPECT_FALSE(b.vacuous);
}

TEST(ZoneBound, ModerateDemandByHand) {
  NetworkGeometry g;
  const auto in = free_flow_bound_inputs(paper_fundamental_diagram(), g, 20.0, 5500.0);
  // (33000 - 25920) * 32 / ((4320 - 1100) * 100)
  EXPECT_NEAR(l0_lower_bound(in).km, 7080.0 * 32.0 / 322000.0, 1e-12);
}

TEST(ZoneBound, ClearingAndArrivalTimes) {
  const auto in = high_demand();
  // (4.8 * 70 + 1.6 * 420) / 4320 h
  EXPECT_NEAR(time_to_clear(in, 4.8), 1008.0 / 4320.0, 1e-15);
  EXPECT_NEAR(arrival_time(4.8, 20.0, 6, 1.6, 100.0), 0.24 + 0.096, 1e-15);
}

TEST(ZoneBound, VacuousWhenDownstreamIsLight) {
  auto in = high_demand();
  in.densities.assign(6, 10.0);
  const auto b = l0_lower_bound(in);
  EXPECT_TRUE(b.vacuous);
  EXPECT_EQ(b.km, 0.0);
  EXPECT_LT(b.raw_km, 0.0);
  EXPECT_EQ(chasing_verdict(in, 0.0).outcome, ChaseOutcome::absorbed);
}

TEST(ZoneBound, InfeasibleCommandThrows) {
  auto in = high_demand();
  in.v0 = 4320.0 / 70.0;  // exactly the limit
  EXPECT_FALSE(v0_feasible(in));
  EXPECT_THROW(l0_lower_bound(in), InfeasibleCommand);
  in.v0 = 61.0;
  EXPECT_TRUE(v0_feasible(in));
  EXPECT_NO_THROW(l0_lower_bound(in));
}

TEST(ZoneBound, EmptyZoneIsAlwaysFeasible) {
  auto in = high_demand(100.0);
  in.upstream_density = 0.0;
  EXPECT_TRUE(v0_feasible(in));
}

TEST(ZoneBound, InvalidInputsListed) {
  auto in = high_demand();
  in.densities = {1.0, 2.0};
  in.v0 = 0.0;
  EXPECT_EQ(in.check().items().size(), 2u);
  EXPECT_THROW(l0_lower_bound(in), ValidationError);
}

TEST(ZoneBound, TieCountsAsShockwaveRisk) {
  const auto in = high_demand();
  const auto b = l0_lower_bound(in);
  EXPECT_EQ(chasing_verdict(in, b.km).outcome, ChaseOutcome::shockwave_risk);
  EXPECT_EQ(chasing_verdict(in, b.km * (1 + 1e-9)).outcome, ChaseOutcome::absorbed);
  EXPECT_EQ(chasing_verdict(in, b.km * (1 - 1e-9)).outcome, ChaseOutcome::shockwave_risk);
}

// The bound is monotone in each of its drivers.
TEST(ZoneBound, MonotoneInV0DensitiesAndLength) {
  const auto base = l0_lower_bound(high_demand()).km;
  EXPECT_GT(l0_lower_bound(high_demand(25.0)).km, base);
  auto denser = high_demand();
  denser.densities[2] += 5.0;
  EXPECT_GT(l0_lower_bound(denser).km, base);
  auto longer = high_demand();
  longer.section_length = 2.0;
  EXPECT_GT(l0_lower_bound(longer).km, base);
}

TEST(ZoneBound, EquivalenceProperty) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto fd = paper_fundamental_diagram();
  for (int trial = 0; trial < 2000; ++trial) {
    BoundInputs in;
    in.num_sections = 1 + static_cast<int>(u(rng) * 8);
    in.section_length = 0.3 + 2.0 * u(rng);
    in.upstream_density = 150.0 * u(rng);
    const double cap = in.upstream_density > 0 ? std::min(100.0, 4320.0 / in.upstream_density)
                                               : 100.0;
    in.v0 = cap * (0.02 + 0.96 * u(rng));
    for (int i = 0; i < in.num_sections; ++i) in.densities.push_back(400.0 * u(rng));
    const auto b = l0_lower_bound(in);
    const double zone = (2.0 * b.km + 1.0) * u(rng);
    EXPECT_EQ(chasing_verdict(in, zone).outcome == ChaseOutcome::absorbed, zone > b.raw_km);
  }
}
