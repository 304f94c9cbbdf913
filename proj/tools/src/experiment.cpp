#include "experiment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "sfn/error.hpp"
#include "sfn/generators.hpp"
#include "sfn/metrics.hpp"
#include "sfn/optimizer.hpp"
#include "sfn/series.hpp"

namespace sfn::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string sig6(double v) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// FLK reports by seed, so B can reuse its forward phase.
using ForwardCache = std::map<std::uint64_t, FitReport>;

RunResult run_sfn(const ExperimentData& ex, Algorithm algo, const TrainConfig& base, std::uint64_t seed,
                  ForwardCache& cache) {
  TrainConfig cfg = base;
  cfg.algorithm = algo;
  cfg.seed = seed;
  FitReport fit;
  if (algo == Algorithm::FLK || algo == Algorithm::B) {
    auto it = cache.find(seed);
    if (it == cache.end()) it = cache.emplace(seed, flk_construct(ex.split, cfg)).first;
    fit = algo == Algorithm::B ? backward_phase(it->second, ex.split, cfg) : it->second;
  } else {
    fit = construct(ex.split, cfg);
  }
  RunResult r;
  r.ok = true;
  ModelFile file;
  file.network = fit.network;
  file.input_scaling = ex.scaling;
  const std::vector<double> y = predictions(fit.network, ex.split.test.inputs);
  r.metric = score(ex.experiment, y, ex.split.test.targets);
  r.weights = weight_count(fit.network);
  r.validation_mse = fit.validation_mse;
  r.model = serialize_model(file);
  return r;
}

RunResult run_mlp(const ExperimentData& ex, MlpMethod method, const BenchmarkOptions& opts,
                  std::uint64_t seed, std::vector<std::string>& warnings) {
  MlpConfig cfg = opts.mlp;
  cfg.seed = seed;
  const HiddenSelection sel = select_hidden(ex.split, method, opts.hidden_grid, cfg);
  for (const auto& w : sel.warnings) warnings.push_back("seed " + std::to_string(seed) + ": " + w);
  RunResult r;
  r.ok = true;
  const std::vector<double> y = mlp_predict(sel.result.model, ex.split.test.inputs);
  r.metric = score(ex.experiment, y, ex.split.test.targets);
  r.weights = weight_count(sel.result.model);
  r.hidden = sel.hidden;
  r.validation_mse = sel.result.validation_mse;
  r.model = serialize_mlp(sel.result.model);
  return r;
}

}  // namespace

std::vector<double> predictions(const SymbolicNetwork& net, const Matrix& inputs) {
  const CompiledNetwork compiled(net);
  return network_outputs(compiled, parameters(net), inputs);
}

double score(Experiment e, std::span<const double> y, std::span<const double> d) {
  if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
    return std::numeric_limits<double>::infinity();
  }
  return e == Experiment::Synthetic ? mse(y, d) : nmse_percent(y, d);
}

Experiment experiment_of(const DataOptions& data) {
  const std::string s = lower(data.source);
  if (s == "synthetic-grid" || s == "synthetic") return Experiment::Synthetic;
  if (s == "rtt-surrogate") return Experiment::RttSurrogate;
  return Experiment::RttCsv;
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Synthetic:
      return "synthetic";
    case Experiment::RttSurrogate:
      return "rtt-surrogate";
    case Experiment::RttCsv:
      return "rtt-csv";
  }
  return "?";
}

std::vector<InputRange> input_ranges(const Dataset& train) {
  std::vector<InputRange> out(train.input_dim());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double lo = train.inputs(0, k);
    double hi = lo;
    for (std::size_t i = 1; i < train.size(); ++i) {
      lo = std::min(lo, train.inputs(i, k));
      hi = std::max(hi, train.inputs(i, k));
    }
    out[k] = {lo, hi};
  }
  return out;
}

Dataset apply_scaling(const Dataset& data, const std::vector<InputRange>& ranges) {
  ModelFile probe;
  probe.input_scaling = ranges;
  Dataset out = data;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> z = scale_inputs(probe, data.inputs.row(i));
    std::copy(z.begin(), z.end(), out.inputs.row(i).begin());
  }
  return out;
}

ExperimentData load_experiment(const DataOptions& data, std::uint64_t seed) {
  ExperimentData ex;
  ex.experiment = experiment_of(data);
  if (ex.experiment == Experiment::Synthetic) {
    SyntheticConfig sc;
    sc.seed = seed;
    const SyntheticData syn = gen_synthetic_grid(sc);
    auto [train, validation] = split_random(syn.learn, 0.75, seed);
    ex.split.train = std::move(train);
    ex.split.validation = std::move(validation);
    ex.split.test.inputs = syn.test.inputs;
    ex.split.test.targets = syn.test_clean;
  } else {
    std::vector<double> series;
    if (ex.experiment == Experiment::RttSurrogate) {
      series = gen_rtt_surrogate(data.length, seed);
    } else {
      series = load_series_csv_file(data.source, data.column);
    }
    SeriesSpec spec;
    spec.lags = data.lags;
    spec.learning_prefix = data.prefix;
    spec.column = data.column;
    ex.split = lag_embed(series, spec);
    if (ex.split.test.empty()) throw DataError("series leaves no rows for testing after the learning prefix");
  }
  if (ex.split.train.empty() || ex.split.validation.empty()) {
    throw DataError("learning set too small to split into training and validation rows");
  }
  if (data.scale) {
    const auto ranges = input_ranges(ex.split.train);
    ex.split.train = apply_scaling(ex.split.train, ranges);
    ex.split.validation = apply_scaling(ex.split.validation, ranges);
    ex.split.test = apply_scaling(ex.split.test, ranges);
    ex.scaling = ranges;
  }
  return ex;
}

std::string method_name(const Method& m) {
  if (m.is_sfn) return std::string(to_string(m.algorithm)) + "-SFN";
  return std::string(to_string(m.mlp));
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (Algorithm a : kAllAlgorithms) out.push_back({true, a, MlpMethod::BBP});
  for (MlpMethod m : kAllMlpMethods) out.push_back({false, Algorithm::FLK, m});
  return out;
}

std::vector<Method> parse_methods(std::string_view text) {
  if (lower(text) == "all") return all_methods();
  std::vector<Method> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (const auto mlp = parse_mlp_method(item)) {
      out.push_back({false, Algorithm::FLK, *mlp});
    } else if (const auto algo = parse_algorithm(item)) {
      out.push_back({true, *algo, MlpMethod::BBP});
    } else {
      throw ConfigError("unknown method '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty method list");
  return out;
}

BenchmarkReport run_benchmark(const BenchmarkOptions& opts) {
  if (opts.runs == 0) throw ConfigError("--runs must be >= 1");
  validate(opts.train);
  const ExperimentData ex = load_experiment(opts.data, opts.seed);
  BenchmarkReport report;
  report.experiment = ex.experiment;
  report.metric_name = ex.experiment == Experiment::Synthetic ? "MSE" : "NMSE%";
  ForwardCache cache;
  for (const Method& m : opts.methods) {
    MethodSummary summary;
    summary.name = method_name(m);
    for (std::size_t r = 0; r < opts.runs; ++r) {
      const std::uint64_t seed = opts.seed + r;
      RunResult run;
      try {
        run = m.is_sfn ? run_sfn(ex, m.algorithm, opts.train, seed, cache)
                       : run_mlp(ex, m.mlp, opts, seed, summary.warnings);
      } catch (const TrainingError& e) {
        run.ok = false;
        run.error = e.what();
      }
      run.run = r;
      run.seed = seed;
      summary.runs.push_back(std::move(run));
    }
    std::size_t ok = 0;
    double metric = 0.0;
    double weights = 0.0;
    for (const auto& run : summary.runs) {
      if (!run.ok) continue;
      ++ok;
      metric += run.metric;
      weights += static_cast<double>(run.weights);
    }
    summary.failed = ok == 0;
    if (ok > 0) {
      summary.avg_metric = metric / static_cast<double>(ok);
      summary.avg_weights = weights / static_cast<double>(ok);
    }
    summary.identical_networks =
        m.is_sfn && ok == summary.runs.size() && summary.runs.size() > 1 &&
        std::all_of(summary.runs.begin(), summary.runs.end(),
                    [&](const RunResult& run) { return run.model == summary.runs.front().model; });
    report.methods.push_back(std::move(summary));
  }
  return report;
}

std::string config_json(const BenchmarkOptions& opts) {
  Json c;
  c["data"] = opts.data.source;
  c["experiment"] = to_string(experiment_of(opts.data));
  c["column"] = opts.data.column;
  c["length"] = opts.data.length;
  c["lags"] = opts.data.lags;
  c["prefix"] = opts.data.prefix;
  c["scale"] = opts.data.scale;
  c["seed"] = opts.seed;
  c["runs"] = opts.runs;
  Json methods = Json::array();
  for (const auto& m : opts.methods) methods.push_back(method_name(m));
  c["methods"] = methods;
  const TrainConfig& t = opts.train;
  c["max_depth"] = t.max_depth;
  c["goal"] = t.performance_goal;
  c["admission_tolerance"] = t.admission_tolerance;
  c["optimizer_max_iters"] = t.optimizer_max_iters;
  c["optimizer_grad_tol"] = t.optimizer_grad_tol;
  c["optimizer_rel_tol"] = t.optimizer_rel_tol;
  c["reduction"] = t.reduction_factor;
  c["fb_block_size"] = t.fb_block_size == kUnlimitedBlock ? Json("unlimited") : Json(t.fb_block_size);
  c["prune_tolerance"] = finite_or_null(t.prune_tolerance);
  c["restarts"] = t.restarts_per_candidate;
  c["mlp_epochs"] = opts.mlp.epochs;
  c["mlp_learning_rate"] = opts.mlp.learning_rate;
  c["mlp_final_rate_fraction"] = opts.mlp.final_rate_fraction;
  c["mlp_patience"] = opts.mlp.patience;
  c["mlp_br_iterations"] = opts.mlp.br_iterations;
  c["hidden_grid"] = opts.hidden_grid;
  return c.dump();
}

std::string benchmark_records(const BenchmarkOptions& opts, const BenchmarkReport& report) {
  std::string out;
  Json cfg;
  cfg["record"] = "config";
  cfg["config"] = Json::parse(config_json(opts));
  out += cfg.dump() + "\n";
  for (const auto& m : report.methods) {
    for (const auto& r : m.runs) {
      Json j;
      j["record"] = "run";
      j["method"] = m.name;
      j["run"] = r.run;
      j["seed"] = r.seed;
      j["ok"] = r.ok;
      if (r.ok) {
        j["metric"] = report.metric_name;
        j["value"] = finite_or_null(r.metric);
        j["weights"] = r.weights;
        if (r.hidden > 0) j["hidden"] = r.hidden;
        j["validation_mse"] = finite_or_null(r.validation_mse);
      } else {
        j["error"] = r.error;
      }
      out += j.dump() + "\n";
    }
    Json s;
    s["record"] = "summary";
    s["method"] = m.name;
    s["failed"] = m.failed;
    s["metric"] = report.metric_name;
    s["avg_value"] = m.failed ? Json(nullptr) : finite_or_null(m.avg_metric);
    s["avg_weights"] = m.failed ? Json(nullptr) : Json(m.avg_weights);
    s["identical_networks"] = m.identical_networks;
    s["warnings"] = m.warnings;
    out += s.dump() + "\n";
  }
  return out;
}

std::string benchmark_table(const BenchmarkOptions& opts, const BenchmarkReport& report) {
  const std::string metric_header =
      "avg " + std::string(report.experiment == Experiment::Synthetic ? "test MSE" : "NMSE%");
  std::vector<std::array<std::string, 3>> rows;
  rows.push_back({"method", metric_header, "avg weights"});
  for (const auto& m : report.methods) {
    if (m.failed) {
      rows.push_back({m.name, "FAILED", "FAILED"});
    } else {
      rows.push_back({m.name, sig6(m.avg_metric), sig6(m.avg_weights)});
    }
  }
  std::array<std::size_t, 3> width{};
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < 3; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  os << "# config " << config_json(opts) << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << rows[i][0] << std::string(width[0] - rows[i][0].size() + 2, ' ');
    os << std::string(width[1] - rows[i][1].size(), ' ') << rows[i][1] << "  ";
    os << std::string(width[2] - rows[i][2].size(), ' ') << rows[i][2] << "\n";
    if (i == 0) os << std::string(width[0] + width[1] + width[2] + 4, '-') << "\n";
  }
  for (const auto& m : report.methods) {
    if (m.identical_networks) {
      os << "note: " << m.name << ": all " << m.runs.size() << " runs produced the same network\n";
    }
    for (const auto& r : m.runs) {
      if (!r.ok) os << "note: " << m.name << " run " << r.run << " failed: " << r.error << "\n";
    }
    for (const auto& w : m.warnings) os << "warning: " << m.name << ": " << w << "\n";
  }
  return os.str();
}

}  // namespace sfn::cli
