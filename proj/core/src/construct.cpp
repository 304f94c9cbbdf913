#include "sfn/construct.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>

#include "json_envelope.hpp"
#include "sfn/error.hpp"
#include "sfn/metrics.hpp"
#include "sfn/optimizer.hpp"
#include "sfn/parallel.hpp"
#include "sfn/random.hpp"

namespace sfn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Hard ceiling on forward steps; only reachable with a positive prune
// tolerance, where FB could otherwise alternate forever.
constexpr std::size_t kMaxForwardSteps = 256;
constexpr std::uint64_t kSamplingStream = 0x5EED5A3D;

struct State {
  SymbolicNetwork net;
  double train_mse = 0.0;
  double validation_mse = 0.0;
};

struct Trial {
  SymbolicNetwork net;
  double train_mse = kInf;
  double validation_mse = kInf;
};

bool has_shape_parameter(ElementaryKind kind) { return parameter_count(kind) > 1; }

class Builder {
 public:
  Builder(const SplitDataset& data, const TrainConfig& cfg)
      : data_(data), cfg_(cfg), threads_(worker_count(cfg.threads)) {
    validate(cfg_);
    if (data.train.empty()) throw ConfigError("empty training set");
    if (data.validation.empty()) throw ConfigError("empty validation set");
    if (data.train.input_dim() == 0) throw ConfigError("input dimension must be positive");
    if (data.validation.input_dim() != data.train.input_dim()) {
      throw ConfigError("train and validation input dimensions differ");
    }
    state_.net.input_dim = data.train.input_dim();
    state_.train_mse = dataset_mse(state_.net, data.train);
    state_.validation_mse = dataset_mse(state_.net, data.validation);
  }

  bool goal_reached() const { return state_.validation_mse <= cfg_.performance_goal; }

  /// One FLK/FRS step; returns true if a candidate was admitted.
  bool forward_step(bool sample) {
    if (forward_steps_ >= kMaxForwardSteps) return false;
    ++forward_steps_;
    const std::vector<Candidate> all = generate_candidates(state_.net, cfg_.max_depth);
    std::vector<std::size_t> chosen(all.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
    if (sample) chosen = sample_indices(all.size());

    std::vector<Trial> trials(chosen.size());
    parallel_for(chosen.size(), threads_, [&](std::size_t k) {
      const Candidate* addition = &all[chosen[k]];
      trials[k] = run_trial(state_.net, {addition, 1}, chosen[k]);
    });
    evaluations_ += chosen.size();

    std::size_t best = 0;
    for (std::size_t k = 1; k < trials.size(); ++k) {
      if (trials[k].validation_mse < trials[best].validation_mse) best = k;
    }
    const bool admitted = state_.validation_mse - trials[best].validation_mse >
                          cfg_.admission_tolerance;
    for (std::size_t k = 0; k < trials.size(); ++k) {
      log_.push_back({step_, describe(all[chosen[k]]), trials[k].train_mse,
                      trials[k].validation_mse,
                      admitted && k == best ? Decision::Accepted : Decision::Rejected});
    }
    ++step_;
    if (admitted) {
      state_ = {std::move(trials[best].net), trials[best].train_mse, trials[best].validation_mse};
    }
    return admitted;
  }

  /// One FLY step adding a full layer at `level`; returns true if admitted.
  bool layer_step(std::size_t level) {
    std::vector<Candidate> layer;
    std::vector<NodePath> frontier;
    if (level == 1) {
      frontier.emplace_back();
    } else {
      for (NodePath& p : node_paths(state_.net)) {
        if (p.size() == level - 1) frontier.push_back(std::move(p));
      }
    }
    for (const NodePath& attach : frontier) {
      for (ElementaryKind kind : kAllKinds) {
        for (std::size_t in = 0; in < state_.net.input_dim; ++in) layer.push_back({kind, attach, in});
      }
    }
    if (layer.empty()) return false;
    Trial trial = run_trial(state_.net, layer, 0);
    ++evaluations_;
    const bool admitted = state_.validation_mse - trial.validation_mse > cfg_.admission_tolerance;
    log_.push_back({step_, "layer" + std::to_string(level) + "x" + std::to_string(layer.size()),
                    trial.train_mse, trial.validation_mse,
                    admitted ? Decision::Accepted : Decision::Rejected});
    ++step_;
    if (admitted) state_ = {std::move(trial.net), trial.train_mse, trial.validation_mse};
    return admitted;
  }

  void prune_now() {
    SymbolicNetwork pruned = prune(state_.net, data_, cfg_, &log_, step_);
    ++step_;
    state_.net = std::move(pruned);
    state_.train_mse = dataset_mse(state_.net, data_.train);
    state_.validation_mse = dataset_mse(state_.net, data_.validation);
  }

  FitReport finish(std::chrono::steady_clock::time_point start) && {
    FitReport report;
    report.network = std::move(state_.net);
    report.steps = std::move(log_);
    report.candidate_evaluations = evaluations_;
    report.train_mse = state_.train_mse;
    report.validation_mse = state_.validation_mse;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
  }

 private:
  std::vector<std::size_t> sample_indices(std::size_t n) const {
    const double wanted = std::ceil(cfg_.reduction_factor * static_cast<double>(n) - 1e-9);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(wanted), 1, n);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k == n) return idx;
    Rng rng(derive_seed({cfg_.seed, kSamplingStream, step_}));
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(idx[i], idx[i + rng.index(n - i)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
  }

  // Initializations depend only on (seed, step, trial id, restart, addition),
  // so sampled and exhaustive steps agree on every shared candidate.
  Trial run_trial(const SymbolicNetwork& base, std::span<const Candidate> additions,
                  std::size_t trial_id) const {
    const bool random_init = std::any_of(additions.begin(), additions.end(), [](const Candidate& c) {
      return has_shape_parameter(c.kind);
    });
    const std::size_t restarts = random_init ? cfg_.restarts_per_candidate : 1;
    Trial best;
    for (std::size_t r = 0; r < restarts; ++r) {
      SymbolicNetwork net = base;
      for (std::size_t j = 0; j < additions.size(); ++j) {
        const Candidate& c = additions[j];
        std::vector<double> params{0.0};
        if (has_shape_parameter(c.kind)) {
          Rng rng(derive_seed({cfg_.seed, step_, trial_id, r, j}));
          params.push_back(rng.uniform(-1.0, 1.0));
        }
        add_candidate(net, c, std::move(params));
      }
      auto [fitted, train_mse] = fit_parameters(net, data_.train, cfg_);
      if (train_mse < best.train_mse || r == 0) {
        best.net = std::move(fitted);
        best.train_mse = train_mse;
      }
    }
    best.validation_mse = dataset_mse(best.net, data_.validation);
    return best;
  }

  const SplitDataset& data_;
  TrainConfig cfg_;
  std::size_t threads_;
  State state_;
  std::vector<StepRecord> log_;
  std::size_t step_ = 0;
  std::size_t forward_steps_ = 0;
  std::size_t evaluations_ = 0;
};

FitReport run_forward(const SplitDataset& data, const TrainConfig& cfg, bool sample) {
  const auto start = std::chrono::steady_clock::now();
  Builder b(data, cfg);
  while (!b.goal_reached() && b.forward_step(sample)) {
  }
  return std::move(b).finish(start);
}

double nan_to_inf(double v) { return std::isnan(v) ? kInf : v; }

}  // namespace

std::string_view to_string(Algorithm algo) noexcept {
  switch (algo) {
    case Algorithm::FLK:
      return "FLK";
    case Algorithm::FLY:
      return "FLY";
    case Algorithm::FRS:
      return "FRS";
    case Algorithm::FB:
      return "FB";
    case Algorithm::B:
      return "B";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) noexcept {
  std::string s;
  for (char c : text) s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (s.size() > 4 && s.ends_with("-SFN")) s.resize(s.size() - 4);
  for (Algorithm a : kAllAlgorithms) {
    if (s == to_string(a)) return a;
  }
  return std::nullopt;
}

std::string_view to_string(Decision d) noexcept {
  switch (d) {
    case Decision::Accepted:
      return "accepted";
    case Decision::Rejected:
      return "rejected";
    case Decision::Pruned:
      return "pruned";
  }
  return "?";
}

void validate(const TrainConfig& cfg) {
  if (cfg.max_depth == 0) throw ConfigError("max_depth must be positive");
  if (!(cfg.admission_tolerance >= 0.0)) throw ConfigError("admission_tolerance must be >= 0");
  if (cfg.optimizer_max_iters == 0) throw ConfigError("optimizer_max_iters must be positive");
  if (!(cfg.optimizer_grad_tol > 0.0)) throw ConfigError("optimizer_grad_tol must be > 0");
  if (!(cfg.reduction_factor > 0.0 && cfg.reduction_factor <= 1.0)) {
    throw ConfigError("reduction_factor must lie in (0, 1]");
  }
  if (cfg.fb_block_size == 0) throw ConfigError("fb_block_size must be positive");
  if (std::isnan(cfg.prune_tolerance)) throw ConfigError("prune_tolerance is NaN");
  if (cfg.restarts_per_candidate == 0) throw ConfigError("restarts_per_candidate must be positive");
}

std::string describe(const Candidate& c) {
  return std::string(to_string(c.kind)) + "@" + to_string(c.attach) + ":x" +
         std::to_string(c.base_input + 1);
}

std::vector<Candidate> generate_candidates(const SymbolicNetwork& net, std::size_t max_depth) {
  std::vector<NodePath> points;
  points.emplace_back();
  for (NodePath& p : node_paths(net)) {
    if (p.size() < max_depth) points.push_back(std::move(p));
  }
  std::vector<Candidate> out;
  out.reserve(3 * points.size() * net.input_dim);
  for (ElementaryKind kind : kAllKinds) {
    for (const NodePath& point : points) {
      for (std::size_t in = 0; in < net.input_dim; ++in) out.push_back({kind, point, in});
    }
  }
  return out;
}

NodePath add_candidate(SymbolicNetwork& net, const Candidate& c, std::vector<double> params) {
  ElementaryNode node = make_node(c.kind, std::move(params), c.base_input);
  if (c.attach.empty()) {
    net.roots.push_back(std::move(node));
    return {net.roots.size() - 1};
  }
  ElementaryNode& parent = node_at(net, c.attach);
  parent.children.push_back(std::move(node));
  NodePath path = c.attach;
  path.push_back(parent.children.size() - 1);
  return path;
}

double dataset_mse(const SymbolicNetwork& net, const Dataset& data) {
  if (data.empty()) throw DataError("MSE of an empty dataset");
  const CompiledNetwork compiled(net);
  return nan_to_inf(network_mse(compiled, parameters(net), data));
}

std::pair<SymbolicNetwork, double> fit_parameters(const SymbolicNetwork& net, const Dataset& train,
                                                  const TrainConfig& cfg) {
  if (train.empty()) throw ConfigError("empty training set");
  const CompiledNetwork compiled(net);
  const std::vector<double> initial = parameters(net);
  OptimizerOptions options;
  options.max_iterations = cfg.optimizer_max_iters;
  options.gradient_tolerance = cfg.optimizer_grad_tol;
  options.relative_tolerance = cfg.optimizer_rel_tol;
  const FitResult fit = minimize_mse(compiled, initial, train, options);
  SymbolicNetwork out = net;
  set_parameters(out, fit.params);
  return {std::move(out), nan_to_inf(fit.mse)};
}

SymbolicNetwork prune(const SymbolicNetwork& net, const SplitDataset& data, const TrainConfig& cfg,
                      std::vector<StepRecord>* log, std::size_t step) {
  if (cfg.prune_tolerance == -kInf) return net;
  const std::size_t threads = worker_count(cfg.threads);
  SymbolicNetwork current = net;
  double current_val = dataset_mse(current, data.validation);
  while (!current.roots.empty()) {
    const std::vector<NodePath> paths = node_paths(current);
    std::vector<Trial> trials(paths.size());
    parallel_for(paths.size(), threads, [&](std::size_t k) {
      SymbolicNetwork removed = current;
      remove_subtree(removed, paths[k]);
      Trial t;
      t.net = removed;
      t.train_mse = dataset_mse(removed, data.train);
      t.validation_mse = dataset_mse(removed, data.validation);
      if (!removed.roots.empty()) {
        auto [refit, train_mse] = fit_parameters(removed, data.train, cfg);
        const double val = dataset_mse(refit, data.validation);
        if (val < t.validation_mse) t = {std::move(refit), train_mse, val};
      }
      trials[k] = std::move(t);
    });
    std::size_t best = 0;
    for (std::size_t k = 1; k < trials.size(); ++k) {
      if (trials[k].validation_mse < trials[best].validation_mse) best = k;
    }
    const bool commit = trials[best].validation_mse - current_val <= cfg.prune_tolerance;
    if (log) {
      for (std::size_t k = 0; k < trials.size(); ++k) {
        log->push_back({step, "remove@" + to_string(paths[k]), trials[k].train_mse,
                        trials[k].validation_mse,
                        commit && k == best ? Decision::Pruned : Decision::Rejected});
      }
    }
    if (!commit) break;
    current = std::move(trials[best].net);
    current_val = trials[best].validation_mse;
  }
  return current;
}

FitReport flk_construct(const SplitDataset& data, const TrainConfig& cfg) {
  return run_forward(data, cfg, false);
}

FitReport frs_construct(const SplitDataset& data, const TrainConfig& cfg) {
  return run_forward(data, cfg, true);
}

FitReport fly_construct(const SplitDataset& data, const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Builder b(data, cfg);
  for (std::size_t level = 1; level <= cfg.max_depth && !b.goal_reached(); ++level) {
    if (!b.layer_step(level)) break;
  }
  return std::move(b).finish(start);
}

FitReport fb_construct(const SplitDataset& data, const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Builder b(data, cfg);
  std::size_t since_prune = 0;
  while (!b.goal_reached()) {
    if (b.forward_step(false)) {
      if (++since_prune >= cfg.fb_block_size) {
        b.prune_now();
        since_prune = 0;
      }
      continue;
    }
    // Stalled: a finite block still gets its backward pass before stopping.
    if (cfg.fb_block_size != kUnlimitedBlock && since_prune > 0) b.prune_now();
    break;
  }
  return std::move(b).finish(start);
}

FitReport b_construct(const SplitDataset& data, const TrainConfig& cfg) {
  return backward_phase(flk_construct(data, cfg), data, cfg);
}

FitReport backward_phase(FitReport forward, const SplitDataset& data, const TrainConfig& cfg) {
  if (cfg.prune_tolerance == -kInf) return forward;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t step = forward.steps.empty() ? 0 : forward.steps.back().step + 1;
  forward.network = prune(forward.network, data, cfg, &forward.steps, step);
  forward.train_mse = dataset_mse(forward.network, data.train);
  forward.validation_mse = dataset_mse(forward.network, data.validation);
  forward.wall_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return forward;
}

FitReport construct(const SplitDataset& data, const TrainConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::FLK:
      return flk_construct(data, cfg);
    case Algorithm::FLY:
      return fly_construct(data, cfg);
    case Algorithm::FRS:
      return frs_construct(data, cfg);
    case Algorithm::FB:
      return fb_construct(data, cfg);
    case Algorithm::B:
      return b_construct(data, cfg);
  }
  throw ConfigError("unknown algorithm");
}

std::string step_log_records(const FitReport& report) {
  std::string out;
  for (const StepRecord& s : report.steps) {
    detail::Json j;
    j["step"] = s.step;
    j["candidate"] = s.candidate;
    j["train_mse"] = std::isfinite(s.train_mse) ? detail::Json(s.train_mse) : detail::Json(nullptr);
    j["validation_mse"] =
        std::isfinite(s.validation_mse) ? detail::Json(s.validation_mse) : detail::Json(nullptr);
    j["decision"] = std::string(to_string(s.decision));
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<StepRecord> parse_step_log(std::string_view text) {
  std::vector<StepRecord> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(start, nl - start);
    if (!line.empty()) {
      detail::Json j;
      try {
        j = detail::Json::parse(line);
      } catch (const detail::Json::parse_error& e) {
        throw ParseError(std::string("malformed step record: ") + e.what(), start + e.byte);
      }
      StepRecord s;
      s.step = detail::field<std::size_t>(j, "step", "step record");
      s.candidate = detail::field<std::string>(j, "candidate", "step record");
      const auto number_or_inf = [&](const char* name) {
        if (!j.contains(name) || j.at(name).is_null()) return kInf;
        return detail::field<double>(j, name, "step record");
      };
      s.train_mse = number_or_inf("train_mse");
      s.validation_mse = number_or_inf("validation_mse");
      const std::string decision = detail::field<std::string>(j, "decision", "step record");
      if (decision == "accepted") {
        s.decision = Decision::Accepted;
      } else if (decision == "pruned") {
        s.decision = Decision::Pruned;
      } else if (decision == "rejected") {
        s.decision = Decision::Rejected;
      } else {
        throw ParseError("unknown decision '" + decision + "'", start);
      }
      out.push_back(std::move(s));
    }
    start = nl + 1;
  }
  return out;
}

}  // namespace sfn
