#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "sfn/dataset.hpp"
#include "sfn/error.hpp"
#include "sfn/generators.hpp"
#include "sfn/metrics.hpp"
#include "sfn/random.hpp"
#include "sfn/series.hpp"

namespace sfn {
namespace {

TEST(Metrics, MseMatchesLoop) {
  Rng rng(3);
  std::vector<double> y(37), d(37);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = rng.normal();
    d[i] = rng.normal();
  }
  long double sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += (long double)(y[i] - d[i]) * (y[i] - d[i]);
  EXPECT_NEAR(mse(y, d), static_cast<double>(sum / y.size()), 1e-15);
}

TEST(Metrics, NmseKnownValues) {
  const std::vector<double> zero(4, 0.0), d = {1.0, -2.0, 0.5, 3.0};
  EXPECT_DOUBLE_EQ(nmse_percent(zero, d), 100.0);
  EXPECT_DOUBLE_EQ(nmse_percent(std::vector<double>{1, 1}, std::vector<double>{2, 1}), 20.0);
  EXPECT_DOUBLE_EQ(nmse_percent(d, d), 0.0);
}

TEST(Metrics, NmseIsMseRatio) {
  Rng rng(99);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(50);
    std::vector<double> y(n), d(n), zero(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.normal(0, 3);
      d[i] = rng.normal(1, 2);
    }
    const double ratio = mse(y, d) / mse(zero, d) * 100.0;
    EXPECT_NEAR(nmse_percent(y, d), ratio, 1e-12 * std::max(1.0, ratio));
  }
}

TEST(Metrics, Errors) {
  const std::vector<double> a = {1.0, 2.0}, b = {1.0}, z = {0.0, 0.0};
  EXPECT_THROW(mse(a, b), DataError);
  EXPECT_THROW(mse(std::vector<double>{}, std::vector<double>{}), DataError);
  EXPECT_THROW(nmse_percent(a, z), DataError);
}

TEST(Synthetic, GridsAndTargets) {
  SyntheticConfig cfg;
  const auto data = gen_synthetic_grid(cfg);
  ASSERT_EQ(data.learn.size(), 100u);
  ASSERT_EQ(data.test.size(), 100u);
  EXPECT_DOUBLE_EQ(data.learn.inputs(0, 0), -1.0);
  EXPECT_NEAR(data.learn.inputs(99, 1), 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(data.test.inputs(0, 0), -0.975);
  EXPECT_NEAR(data.test.inputs(99, 0), 0.825, 1e-12);
  std::set<std::pair<double, double>> learn;
  for (std::size_t i = 0; i < 100; ++i) learn.insert({data.learn.inputs(i, 0), data.learn.inputs(i, 1)});
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_FALSE(learn.count({data.test.inputs(i, 0), data.test.inputs(i, 1)}));
    EXPECT_EQ(data.test_clean[i], synthetic_target(data.test.inputs(i, 0), data.test.inputs(i, 1)));
  }
  double noise_var = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const double e = data.learn.targets[i] - synthetic_target(data.learn.inputs(i, 0), data.learn.inputs(i, 1));
    noise_var += e * e / 100;
  }
  EXPECT_GT(noise_var, 0.0025 * 0.5);
  EXPECT_LT(noise_var, 0.0025 * 2.0);
}

TEST(Synthetic, Seeded) {
  SyntheticConfig a, b;
  b.seed = 2;
  EXPECT_EQ(gen_synthetic_grid(a).learn, gen_synthetic_grid(a).learn);
  EXPECT_NE(gen_synthetic_grid(a).learn.targets, gen_synthetic_grid(b).learn.targets);
}

TEST(Split, RandomSizesAndOrder) {
  SyntheticConfig cfg;
  const auto learn = gen_synthetic_grid(cfg).learn;
  auto [train, validation] = split_random(learn, 0.75, 5);
  EXPECT_EQ(train.size(), 75u);
  EXPECT_EQ(validation.size(), 25u);
  std::multiset<double> all(learn.targets.begin(), learn.targets.end()), parts;
  parts.insert(train.targets.begin(), train.targets.end());
  parts.insert(validation.targets.begin(), validation.targets.end());
  EXPECT_EQ(all, parts);
  auto [again, unused] = split_random(learn, 0.75, 5);
  EXPECT_EQ(again, train);
}

TEST(Split, Contiguous) {
  Dataset d;
  d.inputs = Matrix(10, 1);
  for (int i = 0; i < 10; ++i) {
    d.inputs(i, 0) = i;
    d.targets.push_back(i);
  }
  auto [train, validation] = split_contiguous(d, 0.75);
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(validation.targets.front(), 8.0);
  EXPECT_EQ(train_rows_for(2000, 0.75), 1500u);
}

TEST(Dataset, ValidateRejectsMismatchAndNan) {
  Dataset d;
  d.inputs = Matrix(2, 1);
  d.targets = {1.0};
  EXPECT_THROW(validate(d), DataError);
  d.targets = {1.0, std::nan("")};
  EXPECT_THROW(validate(d), DataError);
}

TEST(Series, SmallExample) {
  const std::vector<double> s = {1, 2, 3, 4, 5};
  SeriesSpec spec;
  spec.lags = 3;
  spec.learning_prefix = 2;
  const auto split = lag_embed(s, spec);
  const std::size_t learn = split.train.size() + split.validation.size();
  ASSERT_EQ(learn, 2u);
  const Dataset& first = split.train.size() ? split.train : split.validation;
  EXPECT_EQ(first.inputs(0, 0), 1.0);
  EXPECT_EQ(first.inputs(0, 2), 3.0);
  EXPECT_EQ(first.targets[0], 4.0);
  EXPECT_EQ(embed_all(s, 3).targets, (std::vector<double>{4.0, 5.0}));
}

TEST(Series, PaperSizes) {
  const auto s = gen_rtt_surrogate(13158, 1);
  ASSERT_EQ(s.size(), 13158u);
  const auto split = lag_embed(s, SeriesSpec{});
  EXPECT_EQ(split.train.size(), 1500u);
  EXPECT_EQ(split.validation.size(), 500u);
  EXPECT_EQ(split.test.size(), 11155u);
  EXPECT_EQ(split.test.inputs(0, 0), s[2000]);
  EXPECT_EQ(split.test.targets.back(), s.back());
  EXPECT_EQ(embedded_rows(13158, 3), 13155u);
}

TEST(Series, TooShort) {
  const std::vector<double> s(100, 1.0);
  EXPECT_THROW(lag_embed(s, SeriesSpec{}), DataError);
}

TEST(Surrogate, PositiveAndSeeded) {
  const auto a = gen_rtt_surrogate(3000, 4);
  EXPECT_EQ(a, gen_rtt_surrogate(3000, 4));
  EXPECT_NE(a, gen_rtt_surrogate(3000, 5));
  EXPECT_GE(*std::min_element(a.begin(), a.end()), 1.0);
  EXPECT_THROW(gen_rtt_surrogate(50, 1), DataError);
}

TEST(Csv, ColumnsAndHeaders) {
  EXPECT_EQ(load_series_csv("t,rtt\n0,30.5\n1,31\n\n2,29\n", "rtt"), (std::vector<double>{30.5, 31, 29}));
  EXPECT_EQ(load_series_csv("5\n6\n", "0"), (std::vector<double>{5, 6}));
  EXPECT_EQ(load_series_csv("a,b\n1,2\n", "1"), (std::vector<double>{2}));
  const auto m = load_matrix_csv("x1,x2\n1,2\n3,4\n");
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m(1, 0), 3.0);
}

TEST(Csv, Errors) {
  try {
    load_series_csv("rtt\n1\nabc\n", "rtt");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
  EXPECT_THROW(load_series_csv("a,b\n1,2\n", "c"), DataError);
  EXPECT_THROW(load_series_csv("rtt\n", "rtt"), DataError);
  EXPECT_THROW(load_series_csv_file("/nonexistent/file.csv", "0"), DataError);
}

TEST(Rng, Reproducible) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.normal(), b.normal());
  for (int i = 0; i < 1000; ++i) EXPECT_LT(a.index(7), 7u);
  EXPECT_NE(derive_seed({1, 2}), derive_seed({2, 1}));
}

}  // namespace
}  // namespace sfn
