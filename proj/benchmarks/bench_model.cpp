#include <benchmark/benchmark.h>

#include "vslctm/calibrate.hpp"
#include "vslctm/flux.hpp"
#include "vslctm/scenario.hpp"
#include "vslctm/sweep.hpp"

using namespace vslctm;

static void BM_InterfaceFlows(benchmark::State& state) {
  const auto fd = paper_fundamental_diagram();
  NetworkGeometry geo;
  geo.num_sections = static_cast<int>(state.range(0));
  geo.upstream_zone_length = 2.4;
  auto s = free_flow_state(fd, geo, 7000.0);
  s.densities.back() = 120.0;
  const auto limits = SpeedLimits::uniform(fd.free_flow_speed(), s.densities.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(interface_flows(s, limits, fd, geo, 7000.0, {}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_InterfaceFlows)->Arg(6)->Arg(60)->Arg(600);

static void BM_RunPreset(benchmark::State& state) {
  auto s = preset("paper_high_demand");
  s.controller = state.range(0) ? ControllerKind::rule_based : ControllerKind::no_control;
  const auto config = to_run_config(s);
  for (auto _ : state) {
    auto controller = make_controller(s);
    benchmark::DoNotOptimize(run(config, *controller));
  }
}
BENCHMARK(BM_RunPreset)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Metrics(benchmark::State& state) {
  const auto s = preset("paper_high_demand");
  const auto r = run_scenario(s);
  const auto cfg = metrics_config(s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_metrics(r.trace, cfg, 48.0, std::pair{0.5, 80.0 / 60.0}));
  }
}
BENCHMARK(BM_Metrics)->Unit(benchmark::kMillisecond);

static void BM_Sweep(benchmark::State& state) {
  SweepSpec spec;
  spec.base = preset("paper_high_demand");
  spec.values = spec.base.zone_length_sweep;
  SweepOptions opts;
  opts.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(spec, opts));
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_Calibrate(benchmark::State& state) {
  const auto obs = generate_observations(paper_fundamental_diagram(),
                                         static_cast<std::size_t>(state.range(0)), 0.02, 7);
  for (auto _ : state) benchmark::DoNotOptimize(fit_fundamental_diagram(obs));
}
BENCHMARK(BM_Calibrate)->Arg(1000)->Arg(100000);

static void BM_ZoneBound(benchmark::State& state) {
  NetworkGeometry geo;
  const auto in = free_flow_bound_inputs(paper_fundamental_diagram(), geo, 20.0, 7000.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(l0_lower_bound(in));
    benchmark::DoNotOptimize(chasing_verdict(in, 4.8));
  }
}
BENCHMARK(BM_ZoneBound);
BENCHMARK_MAIN();
