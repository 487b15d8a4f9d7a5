#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vslctm/calibrate.hpp"

using namespace vslctm;

namespace {

double rel(double a, double b) { return std::abs(a / b - 1.0); }

void expect_close(const FundamentalDiagram& fit, const FundamentalDiagram& truth, double tol,
                  double eps_tol) {
  SCOPED_TRACE("tol " + std::to_string(tol) + ", eps0 tol " + std::to_string(eps_tol));
  EXPECT_LE(rel(fit.capacity(), truth.capacity()), tol);
  EXPECT_LE(rel(fit.downstream_capacity(), truth.downstream_capacity()), tol);
  EXPECT_LE(rel(fit.free_flow_speed(), truth.free_flow_speed()), tol);
  EXPECT_LE(rel(fit.backprop_speed(), truth.backprop_speed()), tol);
  EXPECT_LE(rel(fit.outflow_backprop_speed(), truth.outflow_backprop_speed()), tol);
  EXPECT_LE(rel(fit.jam_density(), truth.jam_density()), tol);
  EXPECT_LE(rel(fit.outflow_jam_density(), truth.outflow_jam_density()), tol);
  EXPECT_LE(rel(fit.capacity_drop(), truth.capacity_drop()), eps_tol);
}

// Relative standard error of an OLS slope under multiplicative flow noise
// sigma, computed on the noiseless branch samples.
double slope_se(const std::vector<FdObservation>& pts, double sigma) {
  double mx = 0.0;
  for (const auto& p : pts) mx += p.density;
  mx /= static_cast<double>(pts.size());
  double sxy = 0.0, var = 0.0, my = 0.0;
  for (const auto& p : pts) my += p.flow / static_cast<double>(pts.size());
  for (const auto& p : pts) {
    sxy += (p.density - mx) * (p.flow - my);
    var += std::pow((p.density - mx) * sigma * p.flow, 2);
  }
  return std::sqrt(var) / std::abs(sxy);
}

}  // namespace

TEST(Calibrate, TwoPointFreeFlowLine) {
  const std::vector<FdObservation> obs{{0.0, 0.0, false}, {72.0, 7200.0, false}};
  EXPECT_DOUBLE_EQ(fit_free_flow_speed(obs), 100.0);
}

TEST(Calibrate, NoiselessRoundTrip) {
  const auto truth = paper_fundamental_diagram();
  const auto fit = fit_fundamental_diagram(generate_observations(truth, 1000, 0.0, 0));
  expect_close(fit.fd, truth, 1e-3, 1e-3);
  EXPECT_TRUE(fit.diagnostics.converged);
  EXPECT_LE(fit.diagnostics.alternations, 5);
  EXPECT_FALSE(fit.diagnostics.outflow_slope_fallback);
  EXPECT_NEAR(fit.diagnostics.discharge_flow, 4320.0, 1e-9);
}

TEST(Calibrate, RoundTripOtherDiagram) {
  const auto truth = FundamentalDiagram::from_triangle(6000.0, 3600.0, 120.0, 25.0, 10.0, 0.15);
  const auto fit = fit_fundamental_diagram(generate_observations(truth, 600, 0.0, 0));
  expect_close(fit.fd, truth, 1e-6, 1e-6);
}

TEST(Calibrate, DischargeClusterGivesDropRatio) {
  // Incident flows clustered at 4320 beyond a 4800 breakpoint.
  auto obs = generate_observations(paper_fundamental_diagram(), 400, 0.0, 0);
  const auto fit = fit_fundamental_diagram(obs);
  EXPECT_NEAR(fit.fd.capacity_drop(), 1.0 - 4320.0 / 4800.0, 1e-9);
}

// Statistical round trip: every parameter within three standard errors of
// the estimator feeding it, for a handful of fixed seeds.
TEST(Calibrate, NoisyRoundTripWithinScaledTolerance) {
  const auto truth = paper_fundamental_diagram();
  const double sigma = 0.02;
  const std::size_t n = 2000;
  const auto clean = generate_observations(truth, n, 0.0, 0);
  std::vector<FdObservation> free, congested, plateau, outflow;
  for (const auto& o : clean) {
    if (o.density <= (o.incident ? 48.0 : 72.0)) {
      free.push_back(o);
    } else if (!o.incident) {
      congested.push_back(o);
    } else if (o.density <= 264.0) {
      plateau.push_back(o);
    } else {
      outflow.push_back(o);
    }
  }
  double sq = 0.0, s = 0.0;
  for (const auto& o : free) {
    sq += o.flow * o.flow;
    s += o.flow;
  }
  const double se_v = sigma * std::sqrt(sq) / s;
  const double se_w = slope_se(congested, sigma);
  const double se_wt = slope_se(outflow, sigma);
  const double se_p = sigma / std::sqrt(static_cast<double>(plateau.size()));
  const double eps = truth.capacity_drop();
  const double se_eps = (1.0 - eps) / eps * std::hypot(se_p, se_v);
  const double tol = 3.0 * std::max({se_v, se_w, se_wt});
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const auto fit = fit_fundamental_diagram(generate_observations(truth, n, sigma, seed));
    expect_close(fit.fd, truth, tol, 3.0 * se_eps);
  }
}

TEST(Calibrate, PinnedFreeFlowSpeedIsReported) {
  const auto truth = paper_fundamental_diagram();
  CalibrationOptions opts;
  opts.pinned_free_flow_speed = 100.0;
  const auto fit = fit_fundamental_diagram(generate_observations(truth, 1000, 0.02, 3), opts);
  EXPECT_EQ(fit.fd.free_flow_speed(), 100.0);
  EXPECT_TRUE(fit.diagnostics.free_flow_pinned);
  EXPECT_NE(fit.diagnostics.fitted_free_flow_speed, 100.0);
}

TEST(Calibrate, OutflowBranchFallsBackToHalfW) {
  auto obs = generate_observations(paper_fundamental_diagram(), 1000, 0.0, 0);
  std::erase_if(obs, [](const FdObservation& o) { return o.incident && o.density > 264.0; });
  const auto fit = fit_fundamental_diagram(obs);
  EXPECT_TRUE(fit.diagnostics.outflow_slope_fallback);
  EXPECT_NEAR(fit.fd.outflow_backprop_speed(), 15.0, 1e-9);
}

TEST(Calibrate, SingleBranchIsAnError) {
  std::vector<FdObservation> obs;
  for (int i = 0; i <= 40; ++i) obs.push_back({1.5 * i, 150.0 * i, false});
  obs.push_back({100.0, 4320.0, true});
  EXPECT_THROW(fit_fundamental_diagram(obs), CalibrationError);
}

TEST(Calibrate, TooFewObservations) {
  const std::vector<FdObservation> obs{{10.0, 1000.0, false}, {200.0, 3000.0, false}};
  EXPECT_THROW(fit_fundamental_diagram(obs), ValidationError);
}

TEST(Calibrate, PositiveCongestedSlopeIsAnError) {
  std::vector<FdObservation> obs;
  for (int i = 0; i <= 20; ++i) obs.push_back({3.0 * i, 300.0 * i, false});
  for (int i = 1; i <= 20; ++i) obs.push_back({60.0 + 10.0 * i, 5000.0 + 10.0 * i, false});
  obs.push_back({30.0, 3000.0, false});
  EXPECT_THROW(fit_fundamental_diagram(obs), CalibrationError);
}

TEST(Calibrate, MissingIncidentSetIsAnError) {
  auto obs = generate_observations(paper_fundamental_diagram(), 200, 0.0, 0);
  std::erase_if(obs, [](const FdObservation& o) { return o.incident; });
  EXPECT_THROW(fit_fundamental_diagram(obs), CalibrationError);
}

TEST(Calibrate, NegativeValuesRejected) {
  auto obs = generate_observations(paper_fundamental_diagram(), 200, 0.0, 0);
  obs[3].flow = -1.0;
  EXPECT_THROW(fit_fundamental_diagram(obs), ValidationError);
}

TEST(Calibrate, CsvRoundTrip) {
  const auto obs = generate_observations(paper_fundamental_diagram(), 60, 0.01, 9);
  std::stringstream ss;
  write_observations(ss, obs);
  const auto back = read_observations(ss);
  ASSERT_EQ(back.size(), obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    EXPECT_NEAR(back[i].density, obs[i].density, 1e-8 * std::max(1.0, obs[i].density));
    EXPECT_NEAR(back[i].flow, obs[i].flow, 1e-8 * std::max(1.0, obs[i].flow));
    EXPECT_EQ(back[i].incident, obs[i].incident);
  }
}

TEST(Calibrate, CsvErrors) {
  std::istringstream empty("");
  EXPECT_THROW(read_observations(empty), ParseError);
  std::istringstream bad_header("rho,q,flag\n1,2,0\n");
  EXPECT_THROW(read_observations(bad_header), ParseError);
  std::istringstream bad_flag("density,flow,incident\n1,2,maybe\n");
  EXPECT_THROW(read_observations(bad_flag), ParseError);
  std::istringstream ok("# comment\ndensity,flow,incident\n1,100,true\n2, 200 ,0\n");
  const auto obs = read_observations(ok);
  ASSERT_EQ(obs.size(), 2u);
  EXPECT_TRUE(obs[0].incident);
  EXPECT_DOUBLE_EQ(obs[1].flow, 200.0);
}

TEST(Calibrate, GeneratorBalancesBranches) {
  const auto obs = generate_observations(paper_fundamental_diagram(), 1000, 0.0, 0);
  ASSERT_EQ(obs.size(), 1000u);
  int normal = 0;
  for (const auto& o : obs) normal += !o.incident;
  EXPECT_EQ(normal, 500);
}
