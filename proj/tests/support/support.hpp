#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sfn/construct.hpp"
#include "sfn/dataset.hpp"
#include "sfn/generators.hpp"
#include "sfn/network.hpp"
#include "sfn/random.hpp"

namespace sfn::testing {

// A hand-built three-root network for the x1^2 x2^2 problem.
inline SymbolicNetwork reference_network() {
  auto e1 = [](double w, double v, std::size_t b) { return make_node(ElementaryKind::E1, {w, v}, b); };
  auto e2 = [](double q, double a, std::size_t b) { return make_node(ElementaryKind::E2, {q, a}, b); };
  auto e3 = [](double p, std::size_t b) { return make_node(ElementaryKind::E3, {p}, b); };
  SymbolicNetwork net;
  net.input_dim = 2;
  net.roots.push_back(make_node(ElementaryKind::E1, {1.878, -0.592}, 0, {e3(-0.31, 0)}));
  net.roots.push_back(
      make_node(ElementaryKind::E2, {-0.307, 0.868}, 0, {e1(0.83, -0.76, 0), e1(1.89, -0.38, 1)}));
  net.roots.push_back(
      make_node(ElementaryKind::E3, {2.607}, 0, {e1(-0.316, -0.75, 0), e1(1.15, -0.72, 1)}));
  return net;
}

// The same expression written out by hand.
inline double reference_direct(double x1, double x2) {
  const double a = x1 - 0.31 * std::log(x1 * x1 + 1.0);
  const double t1 = 1.878 * std::pow(a * a + 1.0, -0.592);
  const double b = x1 + 0.83 * std::pow(x1 * x1 + 1.0, -0.76) + 1.89 * std::pow(x2 * x2 + 1.0, -0.38);
  const double t2 = -0.307 * std::exp(0.868 * b);
  const double c = x1 - 0.316 * std::pow(x1 * x1 + 1.0, -0.75) + 1.15 * std::pow(x2 * x2 + 1.0, -0.72);
  const double t3 = 2.607 * std::log(c * c + 1.0);
  return t1 + t2 + t3;
}

inline ElementaryNode random_node(Rng& rng, std::size_t input_dim, std::size_t levels_left,
                                  std::size_t& budget) {
  const auto kind = kAllKinds[rng.index(3)];
  std::vector<double> params;
  if (kind == ElementaryKind::E1) params = {rng.uniform(-2, 2), rng.uniform(-1.5, 1.5)};
  if (kind == ElementaryKind::E2) params = {rng.uniform(-2, 2), rng.uniform(-1, 1)};
  if (kind == ElementaryKind::E3) params = {rng.uniform(-2, 2)};
  ElementaryNode node = make_node(kind, params, rng.index(input_dim));
  --budget;
  if (levels_left > 1) {
    const std::size_t kids = rng.index(3);
    for (std::size_t k = 0; k < kids && budget > 0; ++k)
      node.children.push_back(random_node(rng, input_dim, levels_left - 1, budget));
  }
  return node;
}

inline SymbolicNetwork random_network(Rng& rng, std::size_t input_dim = 3, std::size_t max_nodes = 10) {
  SymbolicNetwork net;
  net.input_dim = input_dim;
  std::size_t budget = 1 + rng.index(max_nodes);
  while (budget > 0) net.roots.push_back(random_node(rng, input_dim, 3, budget));
  return net;
}

inline std::vector<double> random_point(Rng& rng, std::size_t dim, double lo = -1.0, double hi = 1.0) {
  std::vector<double> x(dim);
  for (auto& v : x) v = rng.uniform(lo, hi);
  return x;
}

// Central differences of f around p with step h * max(1, |p_i|).
inline std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                              std::vector<double> p, double h = 1e-6) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    const double step = h * std::max(1.0, std::abs(keep));
    p[i] = keep + step;
    const double up = f(p);
    p[i] = keep - step;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / std::max(scale, 1e-8);
}

// The synthetic problem, for construction tests paired with quick_config().
inline SplitDataset synthetic_split(std::uint64_t seed = 1) {
  SyntheticConfig sc;
  sc.seed = seed;
  auto syn = gen_synthetic_grid(sc);
  auto [train, validation] = split_random(syn.learn, 0.75, seed);
  return {std::move(train), std::move(validation), Dataset{syn.test.inputs, syn.test_clean}};
}

inline TrainConfig quick_config(Algorithm algo = Algorithm::FLK) {
  TrainConfig cfg;
  cfg.algorithm = algo;
  cfg.max_depth = 2;
  cfg.optimizer_max_iters = 60;
  cfg.threads = 1;
  return cfg;
}

}  // namespace sfn::testing
