#include <benchmark/benchmark.h>

#include "barylab/barycenter.hpp"
#include "barylab/heatreg.hpp"
#include "barylab/rng.hpp"
#include "barylab/transport.hpp"

using namespace barylab;

namespace {

Measure random_measure(const DiscreteSpace& s, Rng& rng) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(s.size()));
  for (auto& x : w) x = rng.exponential();
  return make_measure(s, w);
}

void BM_SolveW2Circle(benchmark::State& state) {
  auto s = build_circle(static_cast<std::size_t>(state.range(0)));
  Rng rng(1);
  auto mu = random_measure(s, rng), rho = random_measure(s, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_w2(mu, rho).value);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveW2Circle)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond)->Complexity();

void BM_SolveW2Sphere(benchmark::State& state) {
  auto s = build_sphere(static_cast<std::size_t>(state.range(0)));
  Rng rng(2);
  auto mu = random_measure(s, rng), rho = random_measure(s, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_w2(mu, rho).value);
}
BENCHMARK(BM_SolveW2Sphere)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Barycenter(benchmark::State& state) {
  auto s = build_interval(static_cast<std::size_t>(state.range(0)));
  Rng rng(3);
  std::vector<Measure> atoms;
  for (int k = 0; k < state.range(1); ++k) atoms.push_back(random_measure(s, rng));
  SecondOrderLaw P(atoms, std::vector<double>(atoms.size(), 1.0 / static_cast<double>(atoms.size())));
  for (auto _ : state) benchmark::DoNotOptimize(solve_barycenter(P, {false}).variance_value);
}
BENCHMARK(BM_Barycenter)->Args({16, 2})->Args({16, 4})->Args({32, 3})->Unit(benchmark::kMillisecond);

void BM_HeatFactorization(benchmark::State& state) {
  auto s = build_interval(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    HeatSemigroup h(s);
    benchmark::DoNotOptimize(h.bandwidth());
  }
}
BENCHMARK(BM_HeatFactorization)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SoftCTransform(benchmark::State& state) {
  auto s = build_circle(static_cast<std::size_t>(state.range(0)));
  HeatSemigroup h(s);
  auto k = h.kernel(0.025);
  Rng rng(4);
  Eigen::VectorXd psi(static_cast<Eigen::Index>(s.size()));
  for (auto& x : psi) x = rng.uniform(-0.1, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(soft_c_transform(k, psi, 0.05).sum());
}
BENCHMARK(BM_SoftCTransform)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
