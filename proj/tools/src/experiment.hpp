#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sfn/construct.hpp"
#include "sfn/dataset.hpp"
#include "sfn/mlp.hpp"
#include "sfn/model_io.hpp"

namespace sfn::cli {

/// Where the data comes from: "synthetic-grid", "rtt-surrogate" or a CSV path.
struct DataOptions {
  std::string source = "synthetic-grid";
  std::string column = "0";
  std::size_t length = 13158;
  std::size_t lags = 3;
  std::size_t prefix = 2000;
  bool scale = false;
};

enum class Experiment { Synthetic, RttSurrogate, RttCsv };

Experiment experiment_of(const DataOptions& data);
std::string to_string(Experiment e);

/// A loaded experiment. For the synthetic grid the test targets are the
/// noise-free function values and scoring uses MSE; series experiments use
/// NMSE%.
struct ExperimentData {
  Experiment experiment = Experiment::Synthetic;
  SplitDataset split;
  std::optional<std::vector<InputRange>> scaling;
};

/// Throws DataError on unreadable or unusable input.
ExperimentData load_experiment(const DataOptions& data, std::uint64_t seed);

/// Plain network outputs on every row; non-finite values pass through.
std::vector<double> predictions(const SymbolicNetwork& net, const Matrix& inputs);
/// MSE (synthetic) or NMSE% (series) of `y`; +inf when any prediction is non-finite.
double score(Experiment e, std::span<const double> y, std::span<const double> d);

/// Per-input min/max of the training rows.
std::vector<InputRange> input_ranges(const Dataset& train);
Dataset apply_scaling(const Dataset& data, const std::vector<InputRange>& ranges);

/// One benchmark entry: an SFN construction algorithm or an MLP method.
struct Method {
  bool is_sfn = true;
  Algorithm algorithm = Algorithm::FLK;
  MlpMethod mlp = MlpMethod::BBP;
};

/// "FLK-SFN", "B-BP", ...
std::string method_name(const Method& m);
/// Table order: the SFN variants, then the MLP methods.
std::vector<Method> all_methods();
/// Comma-separated list of names ("flk,b,es-bp") or "all". Throws ConfigError.
std::vector<Method> parse_methods(std::string_view text);

struct BenchmarkOptions {
  DataOptions data;
  std::vector<Method> methods = all_methods();
  std::size_t runs = 5;
  std::uint64_t seed = 1;
  TrainConfig train;
  MlpConfig mlp;
  std::vector<std::size_t> hidden_grid = kDefaultHiddenGrid;
};

struct RunResult {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double metric = 0.0;  // test MSE (synthetic) or NMSE% (series)
  std::size_t weights = 0;
  std::size_t hidden = 0;  // MLP only
  double validation_mse = 0.0;
  std::string model;  // serialized model
};

struct MethodSummary {
  std::string name;
  std::vector<RunResult> runs;
  bool failed = true;
  double avg_metric = 0.0;
  double avg_weights = 0.0;
  bool identical_networks = false;
  std::vector<std::string> warnings;
};

struct BenchmarkReport {
  Experiment experiment = Experiment::Synthetic;
  std::string metric_name;  // "MSE" or "NMSE%"
  std::vector<MethodSummary> methods;
};

/// Run `r` uses seed + r for every source of randomness except the data of
/// the synthetic and surrogate experiments, which come from the base seed.
BenchmarkReport run_benchmark(const BenchmarkOptions& opts);

/// Resolved configuration as a JSON object (one line).
std::string config_json(const BenchmarkOptions& opts);

/// Line-delimited JSON: a config record, one record per run, one summary per method.
std::string benchmark_records(const BenchmarkOptions& opts, const BenchmarkReport& report);
/// Fixed-width table with 6 significant digits, followed by notes.
std::string benchmark_table(const BenchmarkOptions& opts, const BenchmarkReport& report);

}  // namespace sfn::cli
