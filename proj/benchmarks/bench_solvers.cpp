#include <benchmark/benchmark.h>

#include <cmath>
#include <span>

#include "epictrl/adjoint.hpp"
#include "epictrl/forward.hpp"
#include "epictrl/optimizer.hpp"
#include "epictrl/sensitivity.hpp"

using namespace epictrl;

namespace {

Scenario bump_scenario(int dim, int cells, std::size_t steps) {
  const int c[2] = {cells, cells};
  const double l[2] = {1.0, 1.0};
  const Mesh mesh = Mesh::build(dim, std::span<const int>(c, dim), std::span<const double>(l, dim));
  EpidemicState init = EpidemicState::zeros(mesh);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += std::pow(mesh.center(k, a) - 0.5, 2);
    init.s[k] = 0.8;
    init.e[k] = 0.05 + 0.1 * std::exp(-20.0 * r2);
    init.i[k] = 0.05 + 0.1 * std::exp(-30.0 * r2);
  }
  DiffusionSpec diffusion;
  for (auto& k : diffusion.kappa) k = Coefficient::constant(0.01);
  diffusion.kappa_lo = 1e-3;
  diffusion.kappa_hi = 1.0;
  const std::size_t n = mesh.num_cells();
  return validate_scenario(Scenario{mesh, TimeGrid{1.0, steps}, RateConstants{0.2, 0.1, 0.4},
                                    WaningRate::constant(0.05, steps), diffusion, std::move(init),
                                    ControlBounds{SpaceTimeField(steps, n, 1.0), SpaceTimeField(steps, n, 0.6)},
                                    ThresholdTarget{0.12}});
}

void BM_Forward1D(benchmark::State& state) {
  const Scenario sc = bump_scenario(1, static_cast<int>(state.range(0)), 1000);
  const ControlPair u = scaled_bounds(sc.bounds, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_forward(sc, u));
}
BENCHMARK(BM_Forward1D)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Forward2D(benchmark::State& state) {
  const Scenario sc = bump_scenario(2, static_cast<int>(state.range(0)), 100);
  const ControlPair u = scaled_bounds(sc.bounds, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_forward(sc, u));
}
BENCHMARK(BM_Forward2D)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Adjoint1D(benchmark::State& state) {
  const Scenario sc = bump_scenario(1, 64, 1000);
  const ControlPair u = scaled_bounds(sc.bounds, 0.5);
  const Trajectory fwd = solve_forward(sc, u);
  for (auto _ : state) benchmark::DoNotOptimize(solve_adjoint(sc, fwd, u));
}
BENCHMARK(BM_Adjoint1D)->Unit(benchmark::kMillisecond);

void BM_Tangent1D(benchmark::State& state) {
  const Scenario sc = bump_scenario(1, 64, 1000);
  const ControlPair u = scaled_bounds(sc.bounds, 0.5);
  const Trajectory fwd = solve_forward(sc, u);
  const ControlPair h = scaled_bounds(sc.bounds, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_tangent(sc, fwd, u, h));
}
BENCHMARK(BM_Tangent1D)->Unit(benchmark::kMillisecond);

void BM_ReducedGradient1D(benchmark::State& state) {
  const Scenario sc = bump_scenario(1, 64, 1000);
  const ControlPair u = scaled_bounds(sc.bounds, 0.5);
  for (auto _ : state) {
    const Trajectory fwd = solve_forward(sc, u);
    benchmark::DoNotOptimize(reduced_gradient(fwd, solve_adjoint(sc, fwd, u), u));
  }
}
BENCHMARK(BM_ReducedGradient1D)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
