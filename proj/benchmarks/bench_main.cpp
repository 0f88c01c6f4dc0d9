#include <benchmark/benchmark.h>

#include <rbc/attacks.hpp>
#include <rbc/network.hpp>
#include <rbc/random.hpp>
#include <rbc/region.hpp>

namespace rbc {
namespace {

// Same shape as the MNIST model, random weights.
const Network& mnist_mlp() {
  static const Network net =
      Network::glorot(mlp_spec(std::vector<std::size_t>{784, 128, 128, 10}), 1);
  return net;
}

std::vector<double> image(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(784);
  for (auto& v : x) v = rng.uniform(0.0, 1.0);
  return x;
}

void BM_Predict(benchmark::State& state) {
  const auto x = image(2);
  for (auto _ : state) benchmark::DoNotOptimize(predict(mnist_mlp(), x));
}
BENCHMARK(BM_Predict);

void BM_InputGradient(benchmark::State& state) {
  const auto x = image(3);
  for (auto _ : state) benchmark::DoNotOptimize(input_gradient(mnist_mlp(), x, 4));
}
BENCHMARK(BM_InputGradient);

void BM_Vote(benchmark::State& state) {
  const auto x = image(4);
  const auto m = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(vote(mnist_mlp(), x, 0.3, m, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Vote)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ClassifyEarly(benchmark::State& state) {
  const auto x = image(5);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(classify_early(mnist_mlp(), x, 0.3, 1000, seed++));
}
BENCHMARK(BM_ClassifyEarly)->Unit(benchmark::kMillisecond);

void BM_CwL2(benchmark::State& state) {
  const auto x = image(6);
  CwConfig cfg;
  cfg.binary_search_steps = 1;
  cfg.inner_iterations = static_cast<std::size_t>(state.range(0));
  cfg.abort_early = false;
  const std::size_t target = (predict(mnist_mlp(), x) + 1) % 10;
  for (auto _ : state) benchmark::DoNotOptimize(t_cw_l2(mnist_mlp(), x, target, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CwL2)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace rbc

BENCHMARK_MAIN();
