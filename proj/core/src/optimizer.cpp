#include "sfn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace sfn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Forward pass over the data keeping intermediates in `batch`; returns the
// MSE, or +inf if any exponent clamped or any output is non-finite.
double batch_mse(const CompiledNetwork& net, std::span<const double> params, const Dataset& data,
                 CompiledNetwork::Batch& batch, std::vector<double>& outputs) {
  outputs.resize(data.size());
  if (net.forward_rows(params, data.inputs, batch, outputs)) return kInf;
  double sse = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(outputs[i])) return kInf;
    const double e = outputs[i] - data.targets[i];
    sse += e * e;
  }
  const double value = sse / static_cast<double>(data.size());
  return std::isfinite(value) ? value : kInf;
}

// Residuals and Jacobian at the parameters last evaluated into `batch`.
bool linearize(const CompiledNetwork& net, std::span<const double> params, const Dataset& data,
               const CompiledNetwork::Batch& batch, const std::vector<double>& outputs,
               Eigen::MatrixXd& jac, Eigen::VectorXd& residual) {
  const std::size_t m = data.size();
  const std::size_t n = net.parameter_count();
  jac.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  residual.resize(static_cast<Eigen::Index>(m));
  CompiledNetwork::Scratch scratch;
  std::vector<double> row(n);
  for (std::size_t i = 0; i < m; ++i) {
    residual(static_cast<Eigen::Index>(i)) = outputs[i] - data.targets[i];
    net.gradient_row(params, batch, i, row, scratch);
    for (std::size_t k = 0; k < n; ++k) {
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
  }
  return jac.allFinite();
}

}  // namespace

double network_mse(const CompiledNetwork& net, std::span<const double> params, const Dataset& data) {
  CompiledNetwork::Scratch scratch;
  double sse = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    bool clamped = false;
    const double y = net.evaluate(params, data.inputs.row(i), scratch, &clamped);
    if (clamped || !std::isfinite(y)) return kInf;
    const double e = y - data.targets[i];
    sse += e * e;
  }
  const double value = sse / static_cast<double>(data.size());
  return std::isfinite(value) ? value : kInf;
}

std::vector<double> network_outputs(const CompiledNetwork& net, std::span<const double> params,
                                    const Matrix& inputs) {
  CompiledNetwork::Scratch scratch;
  std::vector<double> out(inputs.rows());
  for (std::size_t i = 0; i < inputs.rows(); ++i) out[i] = net.evaluate(params, inputs.row(i), scratch);
  return out;
}

FitResult minimize_mse(const CompiledNetwork& net, std::span<const double> initial,
                       const Dataset& data, const OptimizerOptions& options) {
  FitResult best{std::vector<double>(initial.begin(), initial.end()), kInf, 0};
  const std::size_t n = net.parameter_count();
  if (data.empty()) return best;

  Eigen::MatrixXd jac;
  Eigen::VectorXd residual;
  CompiledNetwork::Batch batch;
  CompiledNetwork::Batch trial_batch;
  std::vector<double> outputs;
  std::vector<double> trial_outputs;
  best.mse = batch_mse(net, best.params, data, batch, outputs);
  if (n == 0 || !std::isfinite(best.mse)) return best;
  if (!linearize(net, best.params, data, batch, outputs, jac, residual)) return best;

  const double scale = 2.0 / static_cast<double>(data.size());
  double lambda = 1e-3;
  // Columns are normalized before forming J^T J so that steep exponentials
  // cannot overflow it; damping the unit diagonal is Marquardt's scaling.
  Eigen::VectorXd column(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd normal(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd gradient;
  Eigen::VectorXd scaled_gradient;
  std::vector<double> trial(n);
  bool relinearize = true;

  while (best.iterations < options.max_iterations) {
    if (relinearize) {
      gradient = jac.transpose() * residual;
      if (!gradient.allFinite()) break;
      if (scale * gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) break;
      if (best.mse == 0.0) break;
      for (Eigen::Index k = 0; k < jac.cols(); ++k) {
        const double norm = jac.col(k).stableNorm();
        column(k) = norm > 0.0 && std::isfinite(norm) ? norm : 1.0;
        jac.col(k) /= column(k);
      }
      normal.setZero();
      normal.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());
      normal = normal.selfadjointView<Eigen::Lower>();
      scaled_gradient = gradient.cwiseQuotient(column);
      relinearize = false;
    }
    ++best.iterations;

    Eigen::MatrixXd damped = normal;
    for (Eigen::Index k = 0; k < damped.rows(); ++k) {
      damped(k, k) += lambda * std::max(normal(k, k), 1e-12);
    }
    const Eigen::VectorXd step = damped.ldlt().solve(-scaled_gradient).cwiseQuotient(column);
    if (!step.allFinite()) {
      lambda *= 4.0;
      if (lambda > 1e16) break;
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      trial[k] = best.params[k] + step(static_cast<Eigen::Index>(k));
    }
    const double trial_mse = batch_mse(net, trial, data, trial_batch, trial_outputs);
    if (trial_mse < best.mse) {
      const double gain = best.mse - trial_mse;
      const double previous = best.mse;
      best.params = trial;
      best.mse = trial_mse;
      lambda = std::max(lambda / 3.0, 1e-12);
      std::swap(batch, trial_batch);
      std::swap(outputs, trial_outputs);
      // Finite outputs but a non-finite Jacobian: keep the point, stop here.
      if (!linearize(net, best.params, data, batch, outputs, jac, residual)) break;
      relinearize = true;
      if (gain <= options.relative_tolerance * previous) break;
    } else {
      lambda *= 4.0;
      if (lambda > 1e16) break;
    }
  }
  return best;
}

}  // namespace sfn
