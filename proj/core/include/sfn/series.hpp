#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sfn/dataset.hpp"

namespace sfn {

struct SeriesSpec {
  std::size_t lags = 3;
  std::size_t horizon = 1;  // only one-step-ahead is supported
  /// Embedded rows used for learning (train + validation). The rest is test.
  std::size_t learning_prefix = 2000;
  double train_fraction = 0.75;
  /// CSV column: a header name, or a 0-based index written as digits.
  std::string column = "0";
};

/// Number of (lags -> next value) rows a series of `length` values yields.
std::size_t embedded_rows(std::size_t length, std::size_t lags);

/// Row t holds s[t .. t+lags-1] with target s[t+lags]. The first
/// learning_prefix rows split contiguously into train then validation; the
/// remaining rows are test. Throws DataError when the series cannot supply
/// learning_prefix rows.
SplitDataset lag_embed(std::span<const double> series, const SeriesSpec& spec);

/// Every embedded row as one dataset (prediction on a whole series).
Dataset embed_all(std::span<const double> series, std::size_t lags);

/// Comma-separated text, one record per line, optional header. Blank lines
/// are skipped. Throws DataError naming the 1-based line of a non-numeric
/// cell, a missing column, or an empty series.
std::vector<double> load_series_csv(std::string_view text, std::string_view column);
std::vector<double> load_series_csv_file(const std::filesystem::path& path,
                                         std::string_view column);

/// Each non-blank line is one numeric row; a leading non-numeric line is a header.
Matrix load_matrix_csv(std::string_view text);

}  // namespace sfn
