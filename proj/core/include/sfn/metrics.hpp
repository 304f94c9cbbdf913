#pragma once

#include <span>

namespace sfn {

/// sum((y - d)^2) / M. Throws DataError on length mismatch or empty input.
double mse(std::span<const double> y, std::span<const double> d);

/// sum((y - d)^2) / sum(d^2) * 100. Throws DataError when sum(d^2) == 0.
double nmse_percent(std::span<const double> y, std::span<const double> d);

}  // namespace sfn
