#include <benchmark/benchmark.h>

#include "conescoop/capture.hpp"
#include "conescoop/cone_geometry.hpp"
#include "conescoop/engine.hpp"
#include "conescoop/fill.hpp"
#include "conescoop/harness.hpp"
#include "conescoop/sheet.hpp"
#include "conescoop/trajectory.hpp"

namespace cs = conescoop;

static void BM_ConeConfig(benchmark::State& state) {
  double d = 70.8;
  for (auto _ : state) {
    const auto c = cs::ConeConfig::from_bottom_diameter(50.0, d);
    benchmark::DoNotOptimize(c.vertex_angle());
    d = d < 99.0 ? d + 0.1 : 70.8;
  }
}
BENCHMARK(BM_ConeConfig);

static void BM_ContainerSdf(benchmark::State& state) {
  const cs::ContainerGeometry g(cs::make_container(0.083));
  double x = -0.03;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g.sdf({x, -0.02}).distance);
    x = x < 0.03 ? x + 1e-4 : -0.03;
  }
}
BENCHMARK(BM_ContainerSdf);

static void BM_PlanScoop(benchmark::State& state) {
  const auto c = cs::make_container(0.083);
  const auto cone = cs::ConeConfig::from_bottom_diameter(0.05, 0.08);
  for (auto _ : state) benchmark::DoNotOptimize(cs::plan_scoop(c, cone, {}).total_duration());
}
BENCHMARK(BM_PlanScoop)->Unit(benchmark::kMillisecond);

// One engine step on a settled 10 g bowl with the tool resting in it.
static void BM_EngineStep(benchmark::State& state) {
  const auto cfg = cs::experiment_matrix(3)[state.range(0)];
  auto world = cs::fill_and_settle(cfg.container, cfg.granular, 1);
  const auto layout = cs::scene_layout(cfg.container);
  const auto plan = cs::plan_scoop(cfg.container, cfg.effector.cone(), {});
  world.statics = layout.statics;
  world.sheet = cs::build_sheet(cfg.effector.sheet, cfg.effector.cone(), cfg.effector.segments,
                                {.anisotropy_gain = cfg.effector.anisotropy_gain,
                                 .base_pose = plan.phase("sweep").waypoints.front()});
  for (auto _ : state) cs::step(world);
  state.counters["particles"] = static_cast<double>(world.size());
}
BENCHMARK(BM_EngineStep)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

static void BM_SheetAdvance(benchmark::State& state) {
  auto s = cs::build_sheet(cs::sheet_preset("pp_sheet"), cs::ConeConfig::from_bottom_diameter(0.05, 0.08),
                           static_cast<std::size_t>(state.range(0)));
  std::vector<cs::Vec2> f(s.nodes.size());
  f.back() = {0.0, -1e-3};
  for (auto _ : state) cs::advance_sheet(s, f, 2e-5);
}
BENCHMARK(BM_SheetAdvance)->Arg(16)->Arg(32)->Arg(64);

BENCHMARK_MAIN();
