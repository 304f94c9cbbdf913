#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sfn/error.hpp"
#include "sfn/mlp.hpp"
#include "support.hpp"

namespace sfn {
namespace {

SplitDataset linear_data(std::size_t n = 80) {
  Rng rng(8);
  Dataset all;
  all.inputs = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(-1, 1);
    all.inputs(i, 0) = x;
    all.targets.push_back(0.5 * x);
  }
  auto [train, validation] = split_contiguous(all, 0.75);
  return {std::move(train), std::move(validation), validation};
}

MlpConfig quick_mlp() {
  MlpConfig cfg;
  cfg.epochs = 300;
  cfg.br_iterations = 50;
  cfg.threads = 1;
  return cfg;
}

TEST(Mlp, WeightCounts) {
  EXPECT_EQ(mlp_weight_count(3, 2), 11u);
  EXPECT_EQ(mlp_weight_count(3, 3), 16u);
  EXPECT_EQ(mlp_weight_count(3, 1), 6u);
}

TEST(Mlp, GradientMatchesCentralDifferences) {
  Rng rng(31);
  for (int n = 0; n < 10; ++n) {
    const std::size_t dim = 1 + rng.index(4), hidden = 1 + rng.index(6);
    Dataset train;
    train.inputs = Matrix(12, dim);
    for (std::size_t i = 0; i < 12; ++i) {
      for (std::size_t j = 0; j < dim; ++j) train.inputs(i, j) = rng.uniform(-3, 3);
      train.targets.push_back(rng.normal(5, 2));
    }
    auto model = mlp_init(train, hidden, MlpMethod::BBP, n);
    auto p = mlp_parameters(model);
    for (auto& v : p) v = rng.uniform(-1, 1);
    set_mlp_parameters(model, p);
    const auto x = testing::random_point(rng, dim, -3, 3);
    std::vector<double> analytic(p.size());
    EXPECT_DOUBLE_EQ(mlp_gradient(model, x, analytic), mlp_predict(model, x));
    const auto numeric = testing::central_difference(
        [&](std::span<const double> q) {
          auto copy = model;
          set_mlp_parameters(copy, q);
          return mlp_predict(copy, x);
        },
        p);
    EXPECT_LT(testing::relative_error(analytic, numeric), 1e-5) << "mlp " << n;
  }
}

TEST(Mlp, LinearTargetWithOneHidden) {
  const auto data = linear_data();
  for (auto method : kAllMlpMethods) {
    const auto res = mlp_train(data, 1, method, quick_mlp());
    EXPECT_LT(res.train_mse, 1e-3) << to_string(method);
    EXPECT_EQ(weight_count(res.model), 4u);
  }
}

TEST(Mlp, EarlyStoppingNeverWorseThanBasic) {
  const auto data = testing::synthetic_split();
  const auto cfg = quick_mlp();
  const auto basic = mlp_train(data, 4, MlpMethod::BBP, cfg);
  const auto es = mlp_train(data, 4, MlpMethod::ESBP, cfg);
  ASSERT_FALSE(es.validation_history.empty());
  ASSERT_LE(es.validation_history.size(), basic.validation_history.size());
  for (std::size_t i = 0; i < es.validation_history.size(); ++i)
    EXPECT_EQ(es.validation_history[i], basic.validation_history[i]);
  EXPECT_EQ(es.validation_mse,
            *std::min_element(es.validation_history.begin(), es.validation_history.end()));
  EXPECT_LE(es.validation_mse, basic.validation_mse);
}

TEST(Mlp, BayesianEffectiveParametersInRange) {
  const auto data = testing::synthetic_split();
  const auto res = mlp_train(data, 3, MlpMethod::BRBP, quick_mlp());
  EXPECT_GT(res.model.effective_parameters, 0.0);
  EXPECT_LE(res.model.effective_parameters, static_cast<double>(weight_count(res.model)));
  EXPECT_GT(res.model.alpha, 0.0);
  EXPECT_GT(res.model.beta, 0.0);
}

TEST(Mlp, Deterministic) {
  const auto data = testing::synthetic_split();
  const auto a = mlp_train(data, 3, MlpMethod::BBP, quick_mlp());
  const auto b = mlp_train(data, 3, MlpMethod::BBP, quick_mlp());
  EXPECT_EQ(a.model, b.model);
}

TEST(SelectHidden, SingleEntryAndTies) {
  const auto data = linear_data();
  const std::vector<std::size_t> one = {1};
  EXPECT_EQ(select_hidden(data, MlpMethod::BBP, one, quick_mlp()).hidden, 1u);
  auto constant = data;
  for (auto* d : {&constant.train, &constant.validation, &constant.test})
    for (auto& t : d->targets) t = 2.0;
  const std::vector<std::size_t> grid = {1, 2, 3};
  const auto sel = select_hidden(constant, MlpMethod::BBP, grid, quick_mlp());
  EXPECT_EQ(sel.hidden, 1u);
  EXPECT_EQ(sel.tried.size(), 3u);
}

TEST(Mlp, SerializationRoundTrip) {
  const auto data = testing::synthetic_split();
  const auto res = mlp_train(data, 2, MlpMethod::BRBP, quick_mlp());
  const auto text = serialize_mlp(res.model, "test");
  EXPECT_EQ(parse_mlp(text), res.model);
  EXPECT_THROW(parse_mlp("{\"schema_version\":1,\"kind\":\"sfn\"}"), ParseError);
}

}  // namespace
}  // namespace sfn
