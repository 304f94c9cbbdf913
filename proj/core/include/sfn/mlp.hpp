#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfn/dataset.hpp"

namespace sfn {

/// Single-hidden-layer perceptron baselines.
///   BBP   basic backpropagation: online gradient descent for a fixed budget
///   ESBP  the same trajectory, keeping the weights with the best validation MSE
///   BRBP  Bayesian regularization: minimizes beta*SSE + alpha*sum(w^2) with
///         alpha and beta re-estimated from the evidence after every step
enum class MlpMethod : std::uint8_t { BBP, ESBP, BRBP };

inline constexpr MlpMethod kAllMlpMethods[] = {MlpMethod::BBP, MlpMethod::ESBP, MlpMethod::BRBP};

std::string_view to_string(MlpMethod m) noexcept;  // "B-BP", "ES-BP", "BR-BP"
std::optional<MlpMethod> parse_mlp_method(std::string_view text) noexcept;

inline const std::vector<std::size_t> kDefaultHiddenGrid = {1, 2, 3, 4, 6, 9, 12, 15};

struct MlpConfig {
  std::size_t epochs = 2000;
  double learning_rate = 0.01;
  /// The learning rate decays geometrically to learning_rate * this at the last epoch.
  double final_rate_fraction = 0.1;
  std::size_t patience = 100;
  /// Evidence (outer) iterations for BR-BP.
  std::size_t br_iterations = 200;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

/// tanh hidden layer, linear output. Inputs and targets are standardized
/// with training-set statistics stored in the model.
struct MlpModel {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  MlpMethod method = MlpMethod::BBP;
  std::vector<double> hidden_weights;  // hidden x input_dim, row-major
  std::vector<double> hidden_bias;
  std::vector<double> output_weights;
  double output_bias = 0.0;
  std::vector<double> input_mean;
  std::vector<double> input_scale;
  double target_mean = 0.0;
  double target_scale = 1.0;
  /// BR-BP evidence state at the end of training (zero for other methods).
  double alpha = 0.0;
  double beta = 0.0;
  double effective_parameters = 0.0;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// input_dim * hidden + hidden + hidden + 1.
constexpr std::size_t mlp_weight_count(std::size_t input_dim, std::size_t hidden) noexcept {
  return input_dim * hidden + hidden + hidden + 1;
}
inline std::size_t weight_count(const MlpModel& m) noexcept {
  return mlp_weight_count(m.input_dim, m.hidden);
}

/// Canonical order: hidden weights (row-major), hidden biases, output weights, output bias.
std::vector<double> mlp_parameters(const MlpModel& m);
void set_mlp_parameters(MlpModel& m, std::span<const double> values);

/// Prediction in target units.
double mlp_predict(const MlpModel& m, std::span<const double> x);
std::vector<double> mlp_predict(const MlpModel& m, const Matrix& inputs);

/// Prediction at x, writing d(prediction)/d(params) into `grad`.
double mlp_gradient(const MlpModel& m, std::span<const double> x, std::span<double> grad);

/// Untrained model with the initialization used by mlp_train.
MlpModel mlp_init(const Dataset& train, std::size_t hidden, MlpMethod method, std::uint64_t seed);

struct MlpTrainResult {
  MlpModel model;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  /// Validation MSE before the first epoch and after every epoch run.
  std::vector<double> validation_history;
  std::size_t epochs_run = 0;
};

/// Throws TrainingError naming the method and epoch on divergence.
MlpTrainResult mlp_train(const SplitDataset& data, std::size_t hidden, MlpMethod method,
                         const MlpConfig& cfg);

struct HiddenSelection {
  std::size_t hidden = 0;
  MlpTrainResult result;
  std::vector<std::pair<std::size_t, double>> tried;  // (hidden, validation MSE)
  std::vector<std::string> warnings;
};

/// Trains every grid entry and keeps the lowest validation MSE (smaller
/// hidden count on ties). Entries that fail are skipped with a warning;
/// throws TrainingError if all fail.
HiddenSelection select_hidden(const SplitDataset& data, MlpMethod method,
                              std::span<const std::size_t> grid, const MlpConfig& cfg);

/// Model-file envelope with "kind": "mlp".
std::string serialize_mlp(const MlpModel& m, std::string_view provenance = {});
MlpModel parse_mlp(std::string_view bytes);

}  // namespace sfn
