#include <benchmark/benchmark.h>

#include <vector>

#include "packcool/hjb.hpp"
#include "packcool/mlp.hpp"
#include "packcool/rng.hpp"

namespace {

packcool::MlpParams make_net(int n_x, packcool::OutputActivation act, std::uint64_t seed) {
  packcool::Rng rng(seed);
  const int sizes[] = {2 * n_x, 64, 64, 1};
  return packcool::init_params(sizes, act, rng);
}

void BM_NetForward(benchmark::State& state) {
  const int n_x = static_cast<int>(state.range(0));
  auto params = make_net(n_x, packcool::OutputActivation::kIdentity, 11);
  packcool::NetGraph net(params);
  packcool::Rng rng(12);
  std::vector<double> obs(2 * n_x);
  for (double& v : obs) v = rng.uniform(-3.0, 3.0);

  for (auto _ : state) {
    obs[0] += 1e-9;
    benchmark::DoNotOptimize(net.forward(obs));
  }
}
BENCHMARK(BM_NetForward)->Arg(50)->Arg(100);

void BM_NetParamGrad(benchmark::State& state) {
  const int n_x = static_cast<int>(state.range(0));
  auto params = make_net(n_x, packcool::OutputActivation::kIdentity, 11);
  packcool::NetGraph net(params);
  packcool::Rng rng(12);
  std::vector<double> obs(2 * n_x);
  for (double& v : obs) v = rng.uniform(-3.0, 3.0);
  std::vector<double> grad(net.param_width());

  for (auto _ : state) {
    net.forward(obs);
    net.add_param_grad(1.0, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_NetParamGrad)->Arg(50)->Arg(100);

void BM_ResidualGrad(benchmark::State& state) {
  const int n_x = static_cast<int>(state.range(0));
  packcool::EnvConfig env;
  env.n_x = n_x;
  env.dx = 1.0 / n_x;
  env.dt = env.dx;

  auto params = make_net(n_x, packcool::OutputActivation::kIdentity, 11);
  packcool::ResidualGraph res(params, 0.99, env.dt, env.resistance);
  res.set_params(packcool::flatten(params));

  packcool::Rng rng(12);
  std::vector<double> u(n_x), w(n_x), udot(n_x), bw(n_x);
  for (double& v : u) v = rng.uniform(-2.0, 2.0);
  for (double& v : w) v = rng.uniform(-5.0, 0.0);
  for (double& v : udot) v = rng.uniform(-1.0, 1.0);
  for (double& v : bw) v = rng.uniform(-1.0, 1.0);
  std::vector<double> grad(packcool::flatten(params).size());

  for (auto _ : state) {
    const double r = res.eval(u, w, udot, bw, 0.5);
    res.add_param_grad(2.0 * r, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_ResidualGrad)->Arg(50)->Arg(100);

}  // namespace
