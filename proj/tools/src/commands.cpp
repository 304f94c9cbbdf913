#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "json.hpp"
#include "sfn/error.hpp"
#include "sfn/expression.hpp"
#include "sfn/generators.hpp"
#include "sfn/metrics.hpp"
#include "sfn/series.hpp"

namespace sfn::cli {
namespace {

using Json = nlohmann::ordered_json;

enum class Format { Text, Records };

std::string full(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sig6(double v) {
  if (!std::isfinite(v)) return full(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Format parse_format(const std::string& s) {
  if (s == "text" || s == "table") return Format::Text;
  if (s == "records" || s == "jsonl") return Format::Records;
  throw ConfigError("--format must be text or records, got '" + s + "'");
}

double parse_real(const std::string& text, const char* flag) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ConfigError(std::string(flag) + " expects a number, got '" + text + "'");
  }
  return v;
}

struct TrainFlags {
  std::string algo = "flk";
  std::size_t max_depth = TrainConfig{}.max_depth;
  double goal = 0.0;
  double reduction = TrainConfig{}.reduction_factor;
  double admission = TrainConfig{}.admission_tolerance;
  std::size_t block = TrainConfig{}.fb_block_size;
  std::string prune_tolerance = "0";
  std::size_t restarts = TrainConfig{}.restarts_per_candidate;
  std::size_t max_iters = TrainConfig{}.optimizer_max_iters;
  double rel_tol = TrainConfig{}.optimizer_rel_tol;
  std::size_t threads = 0;
};

void add_data_flags(CLI::App& cmd, DataOptions& data, std::uint64_t& seed) {
  cmd.add_option("--data", data.source, "synthetic-grid, rtt-surrogate, or a CSV path")->capture_default_str();
  cmd.add_option("--column", data.column, "CSV column name or 0-based index")->capture_default_str();
  cmd.add_option("--length", data.length, "rtt-surrogate series length")->capture_default_str();
  cmd.add_option("--lags", data.lags, "lag-embedding width")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--prefix", data.prefix, "embedded rows used for learning")->capture_default_str();
  cmd.add_flag("--scale", data.scale, "min-max scale inputs with training-set ranges");
  cmd.add_option("--seed", seed, "experiment seed")->capture_default_str();
}

void add_train_flags(CLI::App& cmd, TrainFlags& t, bool with_algo) {
  if (with_algo) cmd.add_option("--algo", t.algo, "flk, fly, frs, fb or b")->capture_default_str();
  cmd.add_option("--max-depth", t.max_depth, "maximum tree levels")->capture_default_str();
  cmd.add_option("--goal", t.goal, "stop once validation MSE <= goal")->capture_default_str();
  cmd.add_option("--reduction", t.reduction, "FRS candidate fraction in (0, 1]")->capture_default_str();
  cmd.add_option("--admission-tolerance", t.admission, "required validation MSE improvement")
      ->capture_default_str();
  cmd.add_option("--block-size", t.block, "FB admissions between pruning passes (0 = never)")
      ->capture_default_str();
  cmd.add_option("--prune-tolerance", t.prune_tolerance, "allowed validation MSE rise per removal (-inf disables)")
      ->capture_default_str();
  cmd.add_option("--restarts", t.restarts, "random restarts per candidate")->capture_default_str();
  cmd.add_option("--max-iters", t.max_iters, "optimizer iterations per fit")->capture_default_str();
  cmd.add_option("--rel-tol", t.rel_tol, "optimizer stops when an accepted step gains less than this fraction")
      ->capture_default_str();
  cmd.add_option("--threads", t.threads, "worker threads (0 = SFN_THREADS or all cores)")->capture_default_str();
}

TrainConfig resolve(const TrainFlags& t, std::uint64_t seed) {
  TrainConfig cfg;
  const auto algo = parse_algorithm(t.algo);
  if (!algo) throw ConfigError("unknown algorithm '" + t.algo + "'");
  cfg.algorithm = *algo;
  cfg.max_depth = t.max_depth;
  cfg.performance_goal = t.goal;
  cfg.reduction_factor = t.reduction;
  cfg.admission_tolerance = t.admission;
  cfg.fb_block_size = t.block == 0 ? kUnlimitedBlock : t.block;
  cfg.prune_tolerance = parse_real(t.prune_tolerance, "--prune-tolerance");
  cfg.restarts_per_candidate = t.restarts;
  cfg.optimizer_max_iters = t.max_iters;
  cfg.optimizer_rel_tol = t.rel_tol;
  cfg.seed = seed;
  cfg.threads = t.threads;
  validate(cfg);
  return cfg;
}

Json train_config_json(const TrainConfig& cfg, const DataOptions& data) {
  Json c;
  c["command"] = "train";
  c["algo"] = std::string(to_string(cfg.algorithm));
  c["data"] = data.source;
  c["column"] = data.column;
  c["length"] = data.length;
  c["lags"] = data.lags;
  c["prefix"] = data.prefix;
  c["scale"] = data.scale;
  c["seed"] = cfg.seed;
  c["max_depth"] = cfg.max_depth;
  c["goal"] = cfg.performance_goal;
  c["reduction"] = cfg.reduction_factor;
  c["admission_tolerance"] = cfg.admission_tolerance;
  c["fb_block_size"] = cfg.fb_block_size == kUnlimitedBlock ? Json("unlimited") : Json(cfg.fb_block_size);
  c["prune_tolerance"] = num(cfg.prune_tolerance);
  c["restarts"] = cfg.restarts_per_candidate;
  c["optimizer_max_iters"] = cfg.optimizer_max_iters;
  c["optimizer_grad_tol"] = cfg.optimizer_grad_tol;
  c["optimizer_rel_tol"] = cfg.optimizer_rel_tol;
  return c;
}

std::string data_provenance(const DataOptions& data, std::uint64_t seed) {
  std::string p = "data=" + data.source + " seed=" + std::to_string(seed);
  if (experiment_of(data) != Experiment::Synthetic) {
    p += " lags=" + std::to_string(data.lags) + " prefix=" + std::to_string(data.prefix);
  }
  if (experiment_of(data) == Experiment::RttSurrogate) p += " length=" + std::to_string(data.length);
  return p;
}

int cmd_train(const TrainFlags& flags, const DataOptions& data, std::uint64_t seed, const std::string& out_path,
              std::string log_path, Format format, std::ostream& out) {
  const TrainConfig cfg = resolve(flags, seed);
  const ExperimentData ex = load_experiment(data, seed);
  const FitReport fit = construct(ex.split, cfg);

  ModelFile file;
  file.network = fit.network;
  file.input_scaling = ex.scaling;
  file.provenance = data_provenance(data, seed);
  if (log_path.empty()) log_path = out_path + ".steps.jsonl";
  write_text_file(out_path, serialize_model(file));
  write_text_file(log_path, step_log_records(fit));

  const std::vector<double> y = predictions(fit.network, ex.split.test.inputs);
  const bool synthetic = ex.experiment == Experiment::Synthetic;
  const double test = score(ex.experiment, y, ex.split.test.targets);
  const std::string expression = export_expression(fit.network);

  const Json config = train_config_json(cfg, data);
  if (format == Format::Records) {
    Json r;
    r["record"] = "train";
    r["config"] = config;
    r["train_mse"] = num(fit.train_mse);
    r["validation_mse"] = num(fit.validation_mse);
    r[synthetic ? "test_mse" : "test_nmse_percent"] = num(test);
    r["weights"] = weight_count(fit.network);
    r["elementary_functions"] = node_count(fit.network);
    r["depth"] = depth(fit.network);
    r["candidate_evaluations"] = fit.candidate_evaluations;
    r["expression"] = expression;
    r["model"] = out_path;
    r["log"] = log_path;
    out << r.dump() << "\n";
  } else {
    out << "# config " << config.dump() << "\n";
    out << "train MSE:            " << sig6(fit.train_mse) << "\n";
    out << "validation MSE:       " << sig6(fit.validation_mse) << "\n";
    out << (synthetic ? "test MSE (clean):     " : "test NMSE%:           ") << sig6(test) << "\n";
    out << "weights:              " << weight_count(fit.network) << "\n";
    out << "elementary functions: " << node_count(fit.network) << "\n";
    out << "depth:                " << depth(fit.network) << "\n";
    out << "expression:           " << expression << "\n";
    out << "model:                " << out_path << "\n";
    out << "step log:             " << log_path << "\n";
  }
  return kExitOk;
}

Matrix predict_inputs(const DataOptions& data, std::uint64_t seed, std::size_t input_dim, bool series_mode) {
  const Experiment e = experiment_of(data);
  if (e == Experiment::Synthetic) {
    SyntheticConfig sc;
    sc.seed = seed;
    Matrix m = gen_synthetic_grid(sc).test.inputs;
    if (m.cols() != input_dim) {
      throw DataError("model expects " + std::to_string(input_dim) + " inputs, synthetic grid has 2");
    }
    return m;
  }
  std::vector<double> series;
  if (e == Experiment::RttSurrogate) {
    series = gen_rtt_surrogate(data.length, seed);
  } else {
    const std::string text = read_text_file(data.source);
    if (!series_mode) {
      Matrix m = load_matrix_csv(text);
      if (m.rows() == 0) throw DataError(data.source + ": no data rows");
      if (m.cols() == input_dim) return m;
      if (m.cols() != 1) {
        throw DataError(data.source + ": " + std::to_string(m.cols()) + " columns but the model expects " +
                        std::to_string(input_dim) + " inputs");
      }
    }
    series = load_series_csv(text, data.column);
  }
  if (series.size() <= input_dim) {
    throw DataError("series of length " + std::to_string(series.size()) + " is too short for " +
                    std::to_string(input_dim) + " lags");
  }
  return embed_all(series, input_dim).inputs;
}

int cmd_predict(const std::string& model_path, const DataOptions& data, std::uint64_t seed, bool series_mode,
                Format format, std::ostream& out) {
  const std::string bytes = read_text_file(model_path);
  const std::string kind = model_kind(bytes);
  std::optional<ModelFile> sfn_model;
  std::optional<MlpModel> mlp_model;
  std::size_t input_dim = 0;
  if (kind == "sfn") {
    sfn_model = parse_model(bytes);
    input_dim = sfn_model->network.input_dim;
  } else if (kind == "mlp") {
    mlp_model = parse_mlp(bytes);
    input_dim = mlp_model->input_dim;
  } else {
    throw ModelError(model_path + ": unsupported model kind '" + kind + "'");
  }
  const Matrix rows = predict_inputs(data, seed, input_dim, series_mode);

  Json config;
  config["command"] = "predict";
  config["model"] = model_path;
  config["data"] = data.source;
  config["column"] = data.column;
  config["length"] = data.length;
  config["seed"] = seed;
  config["series"] = series_mode;
  if (format == Format::Records) {
    Json c;
    c["record"] = "config";
    c["config"] = config;
    out << c.dump() << "\n";
  } else {
    out << "# config " << config.dump() << "\n";
  }
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const double y = sfn_model ? predict(*sfn_model, rows.row(i)) : mlp_predict(*mlp_model, rows.row(i));
    if (format == Format::Records) {
      Json r;
      r["record"] = "prediction";
      r["row"] = i;
      r["value"] = num(y);
      out << r.dump() << "\n";
    } else {
      out << full(y) << "\n";
    }
  }
  return kExitOk;
}

int cmd_report(const std::string& log_path, Format format, std::ostream& out) {
  const std::vector<StepRecord> steps = parse_step_log(read_text_file(log_path));
  if (format == Format::Records) {
    FitReport r;
    r.steps = steps;
    out << step_log_records(r);
    return kExitOk;
  }
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t pruned = 0;
  std::size_t cand_width = std::string("candidate").size();
  for (const auto& s : steps) cand_width = std::max(cand_width, s.candidate.size());
  char line[512];
  std::snprintf(line, sizeof line, "%5s  %-*s  %13s  %15s  %s\n", "step", static_cast<int>(cand_width), "candidate",
                "train MSE", "validation MSE", "decision");
  out << line;
  for (const auto& s : steps) {
    std::snprintf(line, sizeof line, "%5zu  %-*s  %13s  %15s  %s\n", s.step, static_cast<int>(cand_width),
                  s.candidate.c_str(), sig6(s.train_mse).c_str(), sig6(s.validation_mse).c_str(),
                  std::string(to_string(s.decision)).c_str());
    out << line;
    switch (s.decision) {
      case Decision::Accepted:
        ++accepted;
        break;
      case Decision::Rejected:
        ++rejected;
        break;
      case Decision::Pruned:
        ++pruned;
        break;
    }
  }
  out << steps.size() << " trials: " << accepted << " accepted, " << rejected << " rejected, " << pruned
      << " pruned\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symbolic function network regression and RTT forecasting", "sfn"};
  app.require_subcommand(1);
  std::string format_text = "text";

  // train
  auto* train = app.add_subcommand("train", "Construct a network and write the model file and step log");
  DataOptions train_data;
  std::uint64_t train_seed = 1;
  TrainFlags train_flags;
  std::string train_out = "model.json";
  std::string train_log;
  add_data_flags(*train, train_data, train_seed);
  add_train_flags(*train, train_flags, true);
  train->add_option("--out", train_out, "model file path")->capture_default_str();
  train->add_option("--log", train_log, "step log path (default <out>.steps.jsonl)");
  train->add_option("--format", format_text, "text or records")->capture_default_str();

  // predict
  auto* pred = app.add_subcommand("predict", "Evaluate a model file on a dataset or series");
  DataOptions pred_data;
  std::uint64_t pred_seed = 1;
  std::string model_path;
  bool series_mode = false;
  pred->add_option("--model", model_path, "model file")->required();
  add_data_flags(*pred, pred_data, pred_seed);
  pred->add_flag("--series", series_mode, "treat a CSV as a series and lag-embed it");
  pred->add_option("--format", format_text, "text or records")->capture_default_str();

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Compare SFN variants and MLP baselines over seeded runs");
  BenchmarkOptions bopts;
  TrainFlags bench_flags;
  std::string methods_text = "all";
  std::string bench_out;
  std::vector<std::size_t> grid = kDefaultHiddenGrid;
  add_data_flags(*bench, bopts.data, bopts.seed);
  add_train_flags(*bench, bench_flags, false);
  bench->add_option("--methods", methods_text, "comma-separated methods or 'all'")->capture_default_str();
  bench->add_option("--runs", bopts.runs, "seeded repetitions per method")->capture_default_str();
  bench->add_option("--mlp-epochs", bopts.mlp.epochs, "backpropagation epochs")->capture_default_str();
  bench->add_option("--br-iterations", bopts.mlp.br_iterations, "BR-BP iterations")->capture_default_str();
  bench->add_option("--hidden-grid", grid, "MLP hidden node counts")->delimiter(',');
  bench->add_option("--out", bench_out, "also write the report to this file");
  bench->add_option("--format", format_text, "text or records")->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "Summarize a step log written by train");
  std::string log_path;
  report->add_option("--log", log_path, "step log")->required();
  report->add_option("--format", format_text, "text or records")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const Format format = parse_format(format_text);
    if (train->parsed()) {
      return cmd_train(train_flags, train_data, train_seed, train_out, train_log, format, out);
    }
    if (pred->parsed()) return cmd_predict(model_path, pred_data, pred_seed, series_mode, format, out);
    if (report->parsed()) return cmd_report(log_path, format, out);

    bench_flags.algo = "flk";
    bopts.train = resolve(bench_flags, bopts.seed);
    bopts.mlp.threads = bench_flags.threads;
    bopts.methods = parse_methods(methods_text);
    if (grid.empty() || std::find(grid.begin(), grid.end(), 0) != grid.end()) {
      throw ConfigError("--hidden-grid entries must be >= 1");
    }
    bopts.hidden_grid = grid;
    const BenchmarkReport result = run_benchmark(bopts);
    const std::string text =
        format == Format::Records ? benchmark_records(bopts, result) : benchmark_table(bopts, result);
    out << text;
    if (!bench_out.empty()) write_text_file(bench_out, text);
    const bool all_failed = std::all_of(result.methods.begin(), result.methods.end(),
                                        [](const MethodSummary& m) { return m.failed; });
    return all_failed ? kExitTraining : kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TrainingError& e) {
    err << "training failed: " << e.what() << "\n";
    return kExitTraining;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace sfn::cli
