#include <gtest/gtest.h>

#include "vslctm/fundamental_diagram.hpp"

using namespace vslctm;

TEST(FundamentalDiagram, DefaultParametersCloseTheTriangle) {
  const auto fd = paper_fundamental_diagram();
  EXPECT_DOUBLE_EQ(fd.capacity(), 7200.0);
  EXPECT_DOUBLE_EQ(fd.downstream_capacity(), 4800.0);
  EXPECT_DOUBLE_EQ(fd.jam_density(), 312.0);
  EXPECT_DOUBLE_EQ(fd.outflow_jam_density(), 552.0);
  EXPECT_DOUBLE_EQ(critical_density(fd), 72.0);
  // Both branches meet the free-flow line at capacity.
  EXPECT_DOUBLE_EQ(fd.backprop_speed() * (fd.jam_density() - 72.0), 7200.0);
  EXPECT_DOUBLE_EQ(fd.outflow_backprop_speed() * (fd.outflow_jam_density() - 72.0), 7200.0);
}

TEST(FundamentalDiagram, FromTriangleClosesJamDensities) {
  const auto fd = FundamentalDiagram::from_triangle(6000.0, 4000.0, 120.0, 20.0, 10.0, 0.2);
  EXPECT_DOUBLE_EQ(fd.jam_density(), 50.0 + 300.0);
  EXPECT_DOUBLE_EQ(fd.outflow_jam_density(), 50.0 + 600.0);
}

TEST(FundamentalDiagram, RejectsBrokenClosure) {
  auto p = paper_fundamental_diagram().params();
  p.jam_density = 300.0;
  EXPECT_THROW(FundamentalDiagram{p}, ValidationError);
  try {
    FundamentalDiagram{p};
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.issues().size(), 1u);
    EXPECT_NE(e.issues()[0].find("jam_density"), std::string::npos);
  }
}

TEST(FundamentalDiagram, ReportsEveryViolation) {
  FdParams p = paper_fundamental_diagram().params();
  p.capacity_drop = 1.5;
  p.free_flow_speed = -1.0;
  p.backprop_speed = 0.0;
  const auto issues = FundamentalDiagram::check(p);
  EXPECT_EQ(issues.items().size(), 3u);
}

TEST(FundamentalDiagram, DownstreamCapacityCannotExceedCapacity) {
  EXPECT_THROW(FundamentalDiagram::from_triangle(7200.0, 8000.0, 100.0, 30.0, 15.0, 0.1),
               ValidationError);
}
