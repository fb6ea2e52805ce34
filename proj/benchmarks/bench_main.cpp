#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "chandis/ansatz.hpp"
#include "chandis/channels.hpp"
#include "chandis/diamond.hpp"
#include "chandis/ksvm.hpp"
#include "chandis/vardisc.hpp"
#include "chandis/vclass.hpp"

using namespace chandis;

namespace {

std::vector<double> random_theta(std::size_t n, Rng& rng) {
  std::vector<double> t(n);
  for (auto& x : t) x = uniform(rng, 0.0, 2 * std::numbers::pi);
  return t;
}

void BM_HeaConjugate(benchmark::State& state) {
  const auto q = static_cast<std::size_t>(state.range(0));
  const auto c = hea(q, 14);
  Rng rng(1);
  const auto theta = random_theta(c.param_count(), rng);
  const auto rho = random_mixed_state(c.dim(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(conjugate(c, theta, rho.matrix()));
}
BENCHMARK(BM_HeaConjugate)->Arg(2)->Arg(3)->Arg(5);

void BM_SuccessGradient(benchmark::State& state) {
  StrategySpec spec;
  spec.strategy = state.range(0) == 0 ? Strategy::Parallel : Strategy::Sequential;
  spec.p = 2;
  spec.r = spec.strategy == Strategy::Parallel ? 3 : 4;
  spec.l = 14;
  SuccessObjective obj(depolarizing(0.0), depolarizing(0.1), spec);
  Rng rng(2);
  const auto theta = random_theta(obj.param_count(), rng);
  std::vector<double> grad(obj.param_count());
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    benchmark::DoNotOptimize(obj.value_and_gradient(theta, grad));
  }
}
BENCHMARK(BM_SuccessGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DiamondEb(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  DiamondOptions opt;
  opt.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(p_diamond(eb_channel_a(), eb_channel_b(), p, opt));
}
BENCHMARK(BM_DiamondEb)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_GramAndDual(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = make_interval_dataset(intervals_I(1), InputPolicy::RandomMixed, 2, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(train_kernel(data));
}
BENCHMARK(BM_GramAndDual)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_ClassifierLoss(benchmark::State& state) {
  const auto data = make_dataset(0.1, 0.9, 1000, Pairing::Paired, 4);
  const std::vector<double> theta{0.1, 0.2, 0.3, 0.4};
  std::vector<double> grad(4);
  for (auto _ : state) benchmark::DoNotOptimize(classifier_loss(ClassifierAnsatz::U2, data, theta, grad));
}
BENCHMARK(BM_ClassifierLoss)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
