#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sfn/construct.hpp"
#include "sfn/error.hpp"
#include "sfn/model_io.hpp"
#include "support.hpp"

namespace sfn {
namespace {

using testing::quick_config;
using testing::synthetic_split;

TEST(Candidates, Counts) {
  SymbolicNetwork net;
  net.input_dim = 3;
  EXPECT_EQ(generate_candidates(net, 3).size(), 9u);
  net.roots.push_back(make_node(ElementaryKind::E1, {1.0, 1.0}, 0));
  EXPECT_EQ(generate_candidates(net, 3).size(), 18u);
  EXPECT_EQ(generate_candidates(net, 1).size(), 9u);
  net.input_dim = 2;
  net.roots[0].base_input = 1;
  EXPECT_EQ(generate_candidates(net, 3).size(), 12u);
  const auto c = generate_candidates(net, 3);
  EXPECT_EQ(describe(c.front()), "E1@root:x1");
}

TEST(Candidates, AddCandidate) {
  SymbolicNetwork net;
  net.input_dim = 2;
  const auto root = add_candidate(net, {ElementaryKind::E2, {}, 1}, {0.0, 0.5});
  EXPECT_EQ(root, (NodePath{0}));
  const auto child = add_candidate(net, {ElementaryKind::E3, {0}, 0}, {0.0});
  EXPECT_EQ(child, (NodePath{0, 0}));
  EXPECT_EQ(describe({ElementaryKind::E3, {0}, 1}), "E3@r0:x2");
  EXPECT_EQ(weight_count(net), 3u);
}

TEST(Config, Validation) {
  TrainConfig cfg;
  cfg.reduction_factor = 0.0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = {};
  cfg.max_depth = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = {};
  cfg.fb_block_size = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Construct, FlkAdmissionStrictlyImproves) {
  const auto data = synthetic_split();
  const auto cfg = quick_config();
  const auto report = flk_construct(data, cfg);
  ASSERT_GT(weight_count(report.network), 0u);
  double last = dataset_mse(SymbolicNetwork{2, {}}, data.validation);
  std::size_t accepted = 0;
  for (const auto& s : report.steps)
    if (s.decision == Decision::Accepted) {
      EXPECT_LT(s.validation_mse, last - cfg.admission_tolerance);
      last = s.validation_mse;
      ++accepted;
    }
  EXPECT_GT(accepted, 0u);
  EXPECT_EQ(report.validation_mse, last);
  EXPECT_EQ(report.validation_mse, dataset_mse(report.network, data.validation));
}

TEST(Construct, Deterministic) {
  const auto data = synthetic_split();
  auto cfg = quick_config();
  const auto a = flk_construct(data, cfg);
  cfg.threads = 2;
  const auto b = flk_construct(data, cfg);
  EXPECT_EQ(a.network, b.network);
  EXPECT_EQ(a.steps, b.steps);
}

TEST(Construct, FrsWithFullReductionIsFlk) {
  const auto data = synthetic_split(3);
  auto cfg = quick_config(Algorithm::FRS);
  cfg.reduction_factor = 1.0;
  const auto frs = frs_construct(data, cfg);
  const auto flk = flk_construct(data, quick_config());
  EXPECT_EQ(serialize_model({kSchemaVersion, frs.network, {}, ""}),
            serialize_model({kSchemaVersion, flk.network, {}, ""}));
  EXPECT_EQ(frs.steps, flk.steps);
}

TEST(Construct, FrsSamplesSubset) {
  const auto data = synthetic_split();
  auto cfg = quick_config(Algorithm::FRS);
  cfg.reduction_factor = 0.5;
  const auto frs = frs_construct(data, cfg);
  const auto flk = flk_construct(data, quick_config());
  EXPECT_LT(frs.candidate_evaluations, flk.candidate_evaluations);
}

TEST(Construct, FbUnlimitedBlockIsFlk) {
  const auto data = synthetic_split(2);
  auto cfg = quick_config(Algorithm::FB);
  cfg.fb_block_size = kUnlimitedBlock;
  const auto fb = fb_construct(data, cfg);
  const auto flk = flk_construct(data, quick_config());
  EXPECT_EQ(fb.network, flk.network);
}

TEST(Construct, BIsBackwardPhaseOfFlk) {
  const auto data = synthetic_split();
  const auto cfg = quick_config(Algorithm::B);
  const auto b = b_construct(data, cfg);
  const auto again = backward_phase(flk_construct(data, cfg), data, cfg);
  EXPECT_EQ(b.network, again.network);
  EXPECT_EQ(b.steps, again.steps);
  EXPECT_LE(weight_count(b.network), weight_count(flk_construct(data, cfg).network));
}

TEST(Prune, NegativeInfinityIsIdentity) {
  const auto data = synthetic_split();
  auto cfg = quick_config();
  const auto net = flk_construct(data, cfg).network;
  cfg.prune_tolerance = -std::numeric_limits<double>::infinity();
  std::vector<StepRecord> log;
  EXPECT_EQ(prune(net, data, cfg, &log), net);
  EXPECT_TRUE(log.empty());
}

TEST(Prune, NeverExceedsTolerance) {
  const auto data = synthetic_split();
  auto cfg = quick_config();
  const auto net = flk_construct(data, cfg).network;
  const auto pruned = prune(net, data, cfg);
  EXPECT_LE(dataset_mse(pruned, data.validation),
            dataset_mse(net, data.validation) + cfg.prune_tolerance);
  EXPECT_LE(weight_count(pruned), weight_count(net));
}

TEST(Construct, RejectedCandidatesLeaveModelBytes) {
  const auto data = synthetic_split();
  auto cfg = quick_config();
  cfg.admission_tolerance = 1e300;
  const auto report = flk_construct(data, cfg);
  EXPECT_FALSE(report.steps.empty());
  for (const auto& s : report.steps) EXPECT_EQ(s.decision, Decision::Rejected);
  EXPECT_EQ(serialize_model({kSchemaVersion, report.network, {}, "x"}),
            serialize_model({kSchemaVersion, SymbolicNetwork{2, {}}, {}, "x"}));
}

TEST(FitParameters, DoesNotTouchInput) {
  const auto data = synthetic_split();
  const auto cfg = quick_config();
  const auto net = flk_construct(data, cfg).network;
  const std::string before = serialize_model({kSchemaVersion, net, {}, "x"});
  auto trial = net;
  add_candidate(trial, {ElementaryKind::E2, {}, 0}, {0.0, 0.3});
  const auto [fitted, m] = fit_parameters(trial, data.train, cfg);
  EXPECT_LE(m, dataset_mse(trial, data.train));
  EXPECT_EQ(weight_count(fitted), weight_count(net) + 2);
  EXPECT_EQ(serialize_model({kSchemaVersion, net, {}, "x"}), before);
}

TEST(FitParameters, EmptyTrainThrows) {
  SymbolicNetwork net;
  net.input_dim = 1;
  EXPECT_THROW(fit_parameters(net, Dataset{Matrix(0, 1), {}}, TrainConfig{}), ConfigError);
}

TEST(StepLog, RoundTrip) {
  const auto report = flk_construct(synthetic_split(), quick_config());
  const auto text = step_log_records(report);
  EXPECT_EQ(parse_step_log(text), report.steps);
}

TEST(Fly, AddsLayers) {
  const auto report = fly_construct(synthetic_split(), quick_config(Algorithm::FLY));
  EXPECT_GT(node_count(report.network), 0u);
  EXPECT_LE(depth(report.network), 2u);
}

}  // namespace
}  // namespace sfn
