#include "sfn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sfn/error.hpp"
#include "sfn/random.hpp"

namespace sfn {

void Matrix::push_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw DataError("row has " + std::to_string(values.size()) + " values, expected " +
                    std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void validate(const Dataset& data) {
  if (data.inputs.rows() != data.targets.size()) {
    throw DataError("dataset has " + std::to_string(data.inputs.rows()) + " input rows but " +
                    std::to_string(data.targets.size()) + " targets");
  }
  for (double v : data.inputs.data()) {
    if (!std::isfinite(v)) throw DataError("dataset contains a non-finite input");
  }
  for (double v : data.targets) {
    if (!std::isfinite(v)) throw DataError("dataset contains a non-finite target");
  }
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.inputs = Matrix(0, data.input_dim());
  out.targets.reserve(indices.size());
  for (std::size_t i : indices) {
    out.inputs.push_row(data.inputs.row(i));
    out.targets.push_back(data.targets[i]);
  }
  return out;
}

Dataset slice(const Dataset& data, std::size_t first, std::size_t count) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), first);
  return subset(data, idx);
}

std::size_t train_rows_for(std::size_t rows, double train_fraction) {
  return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows)));
}

std::pair<Dataset, Dataset> split_random(const Dataset& data, double train_fraction,
                                         std::uint64_t seed) {
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  const std::size_t n_train = train_rows_for(n, train_fraction);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {subset(data, train), subset(data, val)};
}

std::pair<Dataset, Dataset> split_contiguous(const Dataset& data, double train_fraction) {
  const std::size_t n_train = train_rows_for(data.size(), train_fraction);
  return {slice(data, 0, n_train), slice(data, n_train, data.size() - n_train)};
}

}  // namespace sfn
