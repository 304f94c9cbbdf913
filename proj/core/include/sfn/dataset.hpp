#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sfn {

/// Dense row-major matrix of samples.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  void push_row(std::span<const double> values);

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Inputs X (one sample per row) and targets d.
struct Dataset {
  Matrix inputs;
  std::vector<double> targets;

  std::size_t size() const noexcept { return targets.size(); }
  std::size_t input_dim() const noexcept { return inputs.cols(); }
  bool empty() const noexcept { return targets.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Train is used for parameter fitting, validation for structure decisions,
/// test only for final reporting.
struct SplitDataset {
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Throws DataError unless rows(X) == len(d) and every entry is finite.
void validate(const Dataset& data);

/// Rows `indices` of `data`, in the given order.
Dataset subset(const Dataset& data, std::span<const std::size_t> indices);

/// Rows [first, first + count).
Dataset slice(const Dataset& data, std::size_t first, std::size_t count);

/// round(fraction * rows) rows for training, the rest for validation, picked
/// by a seeded Fisher-Yates shuffle. Both parts keep the original row order.
std::pair<Dataset, Dataset> split_random(const Dataset& data, double train_fraction,
                                         std::uint64_t seed);

/// Same sizes as split_random, but contiguous: the first rows train.
std::pair<Dataset, Dataset> split_contiguous(const Dataset& data, double train_fraction);

/// Number of training rows for a learning set of `rows` rows.
std::size_t train_rows_for(std::size_t rows, double train_fraction);

}  // namespace sfn
