#include <benchmark/benchmark.h>

#include "sfn/construct.hpp"
#include "sfn/generators.hpp"
#include "sfn/mlp.hpp"
#include "sfn/optimizer.hpp"

namespace {

using namespace sfn;

SymbolicNetwork sample_network() {
  auto e1 = [](double w, double v, std::size_t b) { return make_node(ElementaryKind::E1, {w, v}, b); };
  SymbolicNetwork net;
  net.input_dim = 2;
  net.roots.push_back(make_node(ElementaryKind::E1, {1.878, -0.592}, 0,
                                {make_node(ElementaryKind::E3, {-0.31}, 0)}));
  net.roots.push_back(make_node(ElementaryKind::E2, {-0.307, 0.868}, 0, {e1(0.83, -0.76, 0), e1(1.89, -0.38, 1)}));
  net.roots.push_back(make_node(ElementaryKind::E3, {2.607}, 0, {e1(-0.316, -0.75, 0), e1(1.15, -0.72, 1)}));
  return net;
}

SplitDataset synthetic(std::uint64_t seed = 1) {
  SyntheticConfig sc;
  sc.seed = seed;
  auto syn = gen_synthetic_grid(sc);
  auto [train, validation] = split_random(syn.learn, 0.75, seed);
  return {std::move(train), std::move(validation), Dataset{syn.test.inputs, syn.test_clean}};
}

void BM_Evaluate(benchmark::State& state) {
  const auto net = sample_network();
  const CompiledNetwork compiled(net);
  const auto params = parameters(net);
  CompiledNetwork::Scratch scratch;
  const double x[] = {0.3, -0.6};
  for (auto _ : state) benchmark::DoNotOptimize(compiled.evaluate(params, x, scratch));
}
BENCHMARK(BM_Evaluate);

void BM_Gradient(benchmark::State& state) {
  const auto net = sample_network();
  const CompiledNetwork compiled(net);
  const auto params = parameters(net);
  CompiledNetwork::Scratch scratch;
  std::vector<double> grad(params.size());
  const double x[] = {0.3, -0.6};
  for (auto _ : state) benchmark::DoNotOptimize(compiled.gradient(params, x, grad, scratch));
}
BENCHMARK(BM_Gradient);

void BM_MlpGradient(benchmark::State& state) {
  const auto data = synthetic();
  const auto model = mlp_init(data.train, static_cast<std::size_t>(state.range(0)), MlpMethod::BBP, 1);
  std::vector<double> grad(weight_count(model));
  const double x[] = {0.3, -0.6};
  for (auto _ : state) benchmark::DoNotOptimize(mlp_gradient(model, x, grad));
}
BENCHMARK(BM_MlpGradient)->Arg(2)->Arg(15);

void BM_Fit(benchmark::State& state) {
  const auto data = synthetic();
  const auto net = sample_network();
  const CompiledNetwork compiled(net);
  auto start = parameters(net);
  for (auto& p : start) p *= 0.8;
  for (auto _ : state) benchmark::DoNotOptimize(minimize_mse(compiled, start, data.train, OptimizerOptions{}));
}
BENCHMARK(BM_Fit)->Unit(benchmark::kMillisecond);

// One forward step from an empty network: fit every candidate.
void BM_ConstructionStep(benchmark::State& state) {
  const auto data = synthetic();
  TrainConfig cfg;
  SymbolicNetwork empty;
  empty.input_dim = 2;
  const auto candidates = generate_candidates(empty, cfg.max_depth);
  for (auto _ : state) {
    for (const auto& c : candidates) {
      auto trial = empty;
      add_candidate(trial, c, c.kind == ElementaryKind::E3 ? std::vector<double>{0.0} : std::vector<double>{0.0, 0.5});
      benchmark::DoNotOptimize(fit_parameters(trial, data.train, cfg));
    }
  }
}
BENCHMARK(BM_ConstructionStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
