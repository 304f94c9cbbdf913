#include <gtest/gtest.h>

#include <cmath>

#include "sfn/optimizer.hpp"
#include "support.hpp"

namespace sfn {
namespace {

Dataset line_data(std::size_t n, const std::function<double(double)>& f) {
  Dataset d;
  d.inputs = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    d.inputs(i, 0) = x;
    d.targets.push_back(f(x));
  }
  return d;
}

TEST(Optimizer, E3MatchesClosedForm) {
  Rng rng(5);
  auto data = line_data(41, [&](double x) { return 2.0 * std::log(x * x + 1.0) + rng.normal(0, 0.1); });
  double num = 0, den = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double g = std::log(data.inputs(i, 0) * data.inputs(i, 0) + 1.0);
    num += g * data.targets[i];
    den += g * g;
  }
  SymbolicNetwork net;
  net.input_dim = 1;
  net.roots.push_back(make_node(ElementaryKind::E3, {0.0}, 0));
  const CompiledNetwork compiled(net);
  const std::vector<double> start = {0.0};
  const auto fit = minimize_mse(compiled, start, data, OptimizerOptions{});
  EXPECT_NEAR(fit.params[0], num / den, 1e-8);
  EXPECT_NEAR(fit.params[0], 2.0, 0.1);
}

TEST(Optimizer, ZeroTargetDrivesScaleToZero) {
  auto data = line_data(30, [](double) { return 0.0; });
  SymbolicNetwork net;
  net.input_dim = 1;
  net.roots.push_back(make_node(ElementaryKind::E1, {1.3, 0.4}, 0));
  const CompiledNetwork compiled(net);
  const auto start = parameters(net);
  const auto fit = minimize_mse(compiled, start, data, OptimizerOptions{});
  EXPECT_LT(std::abs(fit.params[0]), 1e-4);
  EXPECT_LT(fit.mse, 1e-8);
}

TEST(Optimizer, NeverWorseThanStart) {
  Rng rng(17);
  const auto split = testing::synthetic_split();
  for (int n = 0; n < 20; ++n) {
    auto net = testing::random_network(rng, 2, 5);
    const CompiledNetwork compiled(net);
    const auto start = parameters(net);
    const double before = network_mse(compiled, start, split.train);
    OptimizerOptions opts;
    opts.max_iterations = 30;
    const auto fit = minimize_mse(compiled, start, split.train, opts);
    EXPECT_LE(fit.mse, before);
    EXPECT_EQ(fit.mse, network_mse(compiled, fit.params, split.train));
  }
}

TEST(Optimizer, OverflowIsInfinite) {
  SymbolicNetwork net;
  net.input_dim = 1;
  net.roots.push_back(make_node(ElementaryKind::E2, {1.0, 1000.0}, 0));
  auto data = line_data(5, [](double x) { return x; });
  const CompiledNetwork compiled(net);
  EXPECT_TRUE(std::isinf(network_mse(compiled, parameters(net), data)));
}

}  // namespace
}  // namespace sfn
