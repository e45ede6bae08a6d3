#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "toda/entire.hpp"
#include "toda/holonomy.hpp"
#include "toda/meanfield.hpp"
#include "toda/solver.hpp"

using namespace toda;

namespace {

Field bump(const TorusGrid& g) {
  Field u(2, g.size());
  for (int a = 0; a < g.n(); ++a)
    for (int b = 0; b < g.n(); ++b) {
      const double x = 2 * std::numbers::pi * g.x(a), y = 2 * std::numbers::pi * g.y(b);
      u[0][g.index(a, b)] = 0.3 * std::cos(x) * std::sin(y);
      u[1][g.index(a, b)] = -0.2 * std::sin(x + y);
    }
  return u;
}

void BM_SpectralLaplacian(benchmark::State& state) {
  const TorusGrid g(static_cast<int>(state.range(0)), 1.0);
  const auto u = bump(g);
  for (auto _ : state) benchmark::DoNotOptimize(laplacian(u[0], g));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_SpectralLaplacian)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_FunctionalGradient(benchmark::State& state) {
  const TorusGrid g(static_cast<int>(state.range(0)), 1.0);
  const auto u = bump(g);
  const RhoPoint rho({6.0, 7.0});
  const auto h = WeightData::constant(2, g.size());
  for (auto _ : state) benchmark::DoNotOptimize(functional_gradient(u, rho, h, g));
}
BENCHMARK(BM_FunctionalGradient)->Arg(64)->Arg(128)->Arg(256);

void BM_GradientFlowSolve(benchmark::State& state) {
  const TorusGrid g(static_cast<int>(state.range(0)), 1.0);
  const RhoPoint rho({2 * std::numbers::pi, 2 * std::numbers::pi});
  const auto h = WeightData::sample(std::vector{parse_weight_preset("cos-bump:1.0"), parse_weight_preset("const")}, g);
  for (auto _ : state) benchmark::DoNotOptimize(gradient_flow(Field(2, g.size()), rho, h, g));
}
BENCHMARK(BM_GradientFlowSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RadialOde(benchmark::State& state) {
  RadialOptions o;
  o.s1 = 30;
  for (auto _ : state) benchmark::DoNotOptimize(radial_toda_solve({0.0, 0.0}, RadialInit{{0.5, -0.7}, std::nullopt}, o));
}
BENCHMARK(BM_RadialOde)->Unit(benchmark::kMillisecond);

void BM_HolonomyLoop(benchmark::State& state) {
  const auto w = WFields::from_profile(symmetric_toda_bubble(0.0));
  for (auto _ : state) benchmark::DoNotOptimize(holonomy_loop(w, 1.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_HolonomyLoop)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
