#include <benchmark/benchmark.h>

#include "packcool/env.hpp"
#include "packcool/rng.hpp"

namespace {

packcool::EnvConfig config_for(int n_x) {
  packcool::EnvConfig cfg;
  cfg.n_x = n_x;
  cfg.dx = 1.0 / n_x;
  cfg.dt = cfg.dx;
  return cfg;
}

void BM_SolverStep(benchmark::State& state) {
  const auto cfg = config_for(static_cast<int>(state.range(0)));
  packcool::ImplicitStepper stepper(cfg);
  packcool::Rng rng(7);
  packcool::GridState grid;
  grid.u.resize(cfg.n_x);
  grid.w.assign(cfg.n_x, cfg.inflow_temp);
  for (double& v : grid.u) v = rng.uniform(-2.0, 2.0);

  double sigma = 0.0;
  for (auto _ : state) {
    stepper.advance(grid, sigma);
    sigma = sigma == 0.0 ? 1.0 : 0.0;
    benchmark::DoNotOptimize(grid.u.data());
  }
}
BENCHMARK(BM_SolverStep)->Arg(50)->Arg(100);

void BM_EnvEpisodeStep(benchmark::State& state) {
  auto cfg = config_for(50);
  packcool::PackCoolingEnv env(cfg);
  env.reset(3);
  double a = 1.0;
  for (auto _ : state) {
    if (env.done()) env.reset(3);
    benchmark::DoNotOptimize(env.step(a).reward);
    a = -a;
  }
}
BENCHMARK(BM_EnvEpisodeStep);

}  // namespace

BENCHMARK_MAIN();
