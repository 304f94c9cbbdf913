#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfn/dataset.hpp"
#include "sfn/network.hpp"
#include "sfn/optimizer.hpp"

namespace sfn {

/// Constructive training strategies.
///   FLK  forward, one link (node) per step
///   FLY  forward, one complete layer per step
///   FRS  FLK over a seeded random subset of the candidates
///   FB   FLK interleaved with pruning every fb_block_size admissions
///   B    FLK until it stalls, then pruning
enum class Algorithm : std::uint8_t { FLK, FLY, FRS, FB, B };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::FLY, Algorithm::FLK, Algorithm::B,
                                               Algorithm::FB, Algorithm::FRS};

std::string_view to_string(Algorithm algo) noexcept;
/// Accepts "flk", "FLK", "flk-sfn", ...
std::optional<Algorithm> parse_algorithm(std::string_view text) noexcept;

/// fb_block_size value meaning "never yield to the backward phase".
inline constexpr std::size_t kUnlimitedBlock = std::numeric_limits<std::size_t>::max();

struct TrainConfig {
  Algorithm algorithm = Algorithm::FLK;
  /// Maximum number of tree levels (roots are level 1).
  std::size_t max_depth = 3;
  /// Construction stops once validation MSE <= this.
  double performance_goal = 0.0;
  /// A step is admitted only if it lowers validation MSE by more than this.
  double admission_tolerance = 1e-6;
  std::size_t optimizer_max_iters = 500;
  double optimizer_grad_tol = 1e-8;
  double optimizer_rel_tol = kDefaultRelativeTolerance;
  /// FRS: fraction of candidates sampled per step, in (0, 1].
  double reduction_factor = 0.5;
  /// FB: admissions between pruning passes.
  std::size_t fb_block_size = 3;
  /// A removal is committed if validation MSE rises by at most this.
  double prune_tolerance = 0.0;
  std::uint64_t seed = 1;
  std::size_t restarts_per_candidate = 2;
  /// Worker threads for candidate trials; 0 defers to worker_count().
  std::size_t threads = 0;
};

/// Throws ConfigError for out-of-range fields.
void validate(const TrainConfig& cfg);

/// Where and what to add. An empty `attach` means a new root.
struct Candidate {
  ElementaryKind kind = ElementaryKind::E1;
  NodePath attach;
  std::size_t base_input = 0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// "E2@root:x1", "E3@r0.1:x2" (inputs 1-based).
std::string describe(const Candidate& c);

/// Kinds x (root level, then every node with level < max_depth in pre-order)
/// x inputs ascending, enumerated kind-major.
std::vector<Candidate> generate_candidates(const SymbolicNetwork& net, std::size_t max_depth);

/// Appends a node for `c` with the given params; returns its path.
NodePath add_candidate(SymbolicNetwork& net, const Candidate& c, std::vector<double> params);

enum class Decision : std::uint8_t { Accepted, Rejected, Pruned };
std::string_view to_string(Decision d) noexcept;

struct StepRecord {
  std::size_t step = 0;
  std::string candidate;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  Decision decision = Decision::Rejected;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct FitReport {
  SymbolicNetwork network;
  std::vector<StepRecord> steps;
  std::size_t candidate_evaluations = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  double wall_seconds = 0.0;
};

/// MSE of the network on `data`; +inf when evaluation blows up.
double dataset_mse(const SymbolicNetwork& net, const Dataset& data);

/// Refits every parameter on `train`. The result's MSE never exceeds the
/// input's. Throws ConfigError on an empty training set.
std::pair<SymbolicNetwork, double> fit_parameters(const SymbolicNetwork& net, const Dataset& train,
                                                  const TrainConfig& cfg);

/// Greedy backward elimination to a fixpoint: repeatedly drops the subtree
/// whose removal (with and without refitting) hurts validation MSE least,
/// while the increase stays within cfg.prune_tolerance. Trials are appended
/// to `log` when given.
SymbolicNetwork prune(const SymbolicNetwork& net, const SplitDataset& data, const TrainConfig& cfg,
                      std::vector<StepRecord>* log = nullptr, std::size_t step = 0);

FitReport flk_construct(const SplitDataset& data, const TrainConfig& cfg);
FitReport fly_construct(const SplitDataset& data, const TrainConfig& cfg);
FitReport frs_construct(const SplitDataset& data, const TrainConfig& cfg);
FitReport fb_construct(const SplitDataset& data, const TrainConfig& cfg);
FitReport b_construct(const SplitDataset& data, const TrainConfig& cfg);

/// B's pruning pass applied to a finished FLK report; b_construct is
/// backward_phase(flk_construct(data, cfg), data, cfg).
FitReport backward_phase(FitReport forward, const SplitDataset& data, const TrainConfig& cfg);

/// Dispatches on cfg.algorithm.
FitReport construct(const SplitDataset& data, const TrainConfig& cfg);

/// One JSON object per line:
///   {"step":0,"candidate":"E1@root:x1","train_mse":...,"validation_mse":...,"decision":"accepted"}
/// Non-finite MSEs are written as null.
std::string step_log_records(const FitReport& report);
std::vector<StepRecord> parse_step_log(std::string_view text);

}  // namespace sfn
