#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sfn/dataset.hpp"
#include "sfn/network.hpp"

namespace sfn {

inline constexpr double kDefaultRelativeTolerance = 1e-8;

struct OptimizerOptions {
  std::size_t max_iterations = 500;
  /// Stop once the max-norm of the MSE gradient drops below this.
  double gradient_tolerance = 1e-8;
  /// Stop once an accepted step improves the MSE by less than this fraction.
  double relative_tolerance = kDefaultRelativeTolerance;
};

struct FitResult {
  std::vector<double> params;
  double mse = 0.0;
  std::size_t iterations = 0;
};

/// Training MSE of `params` on `data`; +inf if any output is non-finite or
/// any exponent was clamped.
double network_mse(const CompiledNetwork& net, std::span<const double> params, const Dataset& data);

/// Network outputs for every row of `inputs`.
std::vector<double> network_outputs(const CompiledNetwork& net, std::span<const double> params,
                                    const Matrix& inputs);

/// Levenberg-Marquardt on the mean squared error with Marquardt diagonal
/// scaling. Only improving steps are accepted, so the returned MSE never
/// exceeds the MSE at `initial`.
FitResult minimize_mse(const CompiledNetwork& net, std::span<const double> initial,
                       const Dataset& data, const OptimizerOptions& options);

}  // namespace sfn
