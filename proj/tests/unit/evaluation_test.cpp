#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "metalearn/batch.hpp"
#include "metalearn/environments.hpp"
#include "metalearn/errors.hpp"
#include "metalearn/evaluation.hpp"
#include "metalearn/online.hpp"
#include "metalearn/parallel.hpp"
#include "oracles.hpp"

namespace metalearn {
namespace {

using testing::data;

std::vector<TaskSplit> splits_of(const std::vector<SampledTask>& tasks) {
  std::vector<TaskSplit> out;
  for (const SampledTask& t : tasks) out.push_back(t.split);
  return out;
}

std::vector<TaskDataset> trains_of(const std::vector<SampledTask>& tasks) {
  std::vector<TaskDataset> out;
  for (const SampledTask& t : tasks) out.push_back(t.split.train);
  return out;
}

TEST(LambdaGrid, Default) {
  const LambdaGrid grid = default_grid();
  ASSERT_EQ(grid.size(), 30u);
  EXPECT_EQ(grid[0], 1e-6);
  EXPECT_EQ(grid[29], 1e3);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_NEAR(std::log10(grid[i]) - std::log10(grid[i - 1]), 9.0 / 29.0, 1e-12);
  }
}

TEST(LambdaGrid, Validation) {
  EXPECT_THROW(LambdaGrid({}), Error);
  EXPECT_THROW(LambdaGrid({1.0, 1.0}), Error);
  EXPECT_THROW(LambdaGrid({-1.0, 1.0}), Error);
  EXPECT_THROW(LambdaGrid::log_spaced(1.0, 0.1, 3), Error);
  EXPECT_EQ(LambdaGrid::log_spaced(0.5, 8.0, 1).size(), 1u);
}

TEST(TransferRisk, ZeroOutputsGiveZero) {
  std::vector<TaskSplit> tasks{{data({{0.5, 0.1}}, {0}), data({{0.2, 0.3}, {0.1, 0}}, {0, 0})}};
  EXPECT_EQ(transfer_risk_estimate(Representation::isotropic(2, 1.0), tasks), 0.0);
}

TEST(TransferRisk, ScalarPipeline) {
  std::vector<TaskSplit> tasks{{data({{1}}, {1}), data({{1}, {0.5}}, {1, 0})}};
  const Representation D = Representation::make(Matrix::Constant(1, 1, 1.0), 0.5);
  // w = 1/2; test residuals 0.5 and 0.25.
  EXPECT_NEAR(transfer_risk_estimate(D, tasks), (0.25 + 0.0625) / 2.0, 1e-15);
}

TEST(TransferRisk, PermutationInvariant) {
  const EnvironmentSpec spec = EnvironmentSpec::make(8, 6, 0.2, 1);
  std::vector<TaskSplit> tasks = splits_of(sample_tasks(spec, StreamPurpose::Test, 9));
  const Representation D = Representation::isotropic(8, 0.5);
  const double forward = transfer_risk_estimate(D, tasks);
  std::reverse(tasks.begin(), tasks.end());
  EXPECT_NEAR(transfer_risk_estimate(D, tasks), forward, 1e-14);
}

TEST(TransferRisk, OracleRepresentationBeatsItlWithoutNoise) {
  const EnvironmentSpec spec = EnvironmentSpec::make(20, 8, 0.0, 2);
  const std::vector<TaskSplit> tasks = splits_of(sample_tasks(spec, StreamPurpose::Test, 30));
  const double lambda = 0.01;
  const Matrix P = spec.basis * spec.basis.transpose();
  const Representation oracle_D = Representation::make(symmetrize(P / (lambda * P.trace())), lambda);
  double best_itl = INFINITY;
  const LambdaGrid itl_grid = LambdaGrid::log_spaced(1e-4, 10.0, 15);
  for (double l : itl_grid.values()) best_itl = std::min(best_itl, itl_risk(tasks, l));
  EXPECT_LT(transfer_risk_estimate(oracle_D, tasks), best_itl);
}

TEST(ExplainedVariance, Examples) {
  std::vector<TaskSplit> tasks{{data({{1, 0}, {0, 1}}, {1, -1}), data({{1, 0}, {0, 1}}, {1, -1})}};
  EXPECT_NEAR(explained_variance_pct(tasks, [](const TaskDataset&) { return LinearPredictor{testing::vec({1, -1})}; }),
              100.0, 1e-12);
  EXPECT_NEAR(explained_variance_pct(tasks, [](const TaskDataset&) { return LinearPredictor{testing::vec({0, 0})}; }),
              0.0, 1e-12);
  EXPECT_LT(explained_variance_pct(tasks, [](const TaskDataset&) { return LinearPredictor{testing::vec({-1, 1})}; }),
            0.0);
}

TEST(ExplainedVariance, DegenerateTasksSkipped) {
  std::vector<TaskSplit> constant{{data({{1}}, {1}), data({{1}, {0}}, {0.5, 0.5})}};
  EXPECT_THROW(explained_variance_pct(Representation::isotropic(1, 1.0), constant), Error);
  std::vector<TaskSplit> mixed = constant;
  mixed.push_back({data({{1}}, {1}), data({{1}, {-1}}, {1, -1})});
  const double ev = explained_variance_pct(mixed, [](const TaskDataset&) { return LinearPredictor{testing::vec({1})}; });
  EXPECT_NEAR(ev, 100.0, 1e-12);
}

TEST(ArgminScore, TiesGoToLowerIndex) {
  const std::vector<double> scores{0.3, 0.1, 0.1, 0.2};
  EXPECT_EQ(argmin_score(scores), 1u);
  EXPECT_THROW(argmin_score(std::vector<double>{}), Error);
}

TEST(SelectOnline, SingletonGridReproducesRunOnline) {
  const EnvironmentSpec spec = EnvironmentSpec::make(6, 5, 0.1, 3);
  const std::vector<TaskDataset> train = trains_of(sample_tasks(spec, StreamPurpose::Train, 12));
  const std::vector<TaskSplit> validation = splits_of(sample_tasks(spec, StreamPurpose::Validation, 3));
  const OnlineSelection s = select_online(stream_from(train), validation, LambdaGrid({0.4}), 12);
  const OnlineResult r = run_online(stream_from(train), 6, 0.4, 12);
  EXPECT_EQ(s.representation.matrix(), r.representation.matrix());
  EXPECT_EQ(s.best_lambda, 0.4);
  ASSERT_EQ(s.trajectory.size(), 12u);
  EXPECT_NEAR(s.trajectory.back().validation_mse[0], transfer_risk_estimate(r.representation, validation), 1e-15);
}

TEST(SelectOnline, PicksArgminAndIsDeterministic) {
  const EnvironmentSpec spec = EnvironmentSpec::make(8, 6, 0.3, 4);
  const std::vector<TaskDataset> train = trains_of(sample_tasks(spec, StreamPurpose::Train, 10));
  const std::vector<TaskSplit> validation = splits_of(sample_tasks(spec, StreamPurpose::Validation, 3));
  const LambdaGrid grid = LambdaGrid::log_spaced(0.01, 10.0, 5);
  SelectionOptions options;
  options.stride = 4;
  int calls = 0;
  options.on_step = [&](const SelectionStep&, const Representation&) { ++calls; };
  const OnlineSelection a = select_online(stream_from(train), validation, grid, 10, options);
  const OnlineSelection b = select_online(stream_from(train), validation, grid, 10, options);
  EXPECT_EQ(calls, 6);  // t = 4, 8, 10 per run
  ASSERT_EQ(a.trajectory.size(), 3u);
  EXPECT_EQ(a.trajectory.back().t, 10);
  const auto& last = a.trajectory.back();
  for (double mse : last.validation_mse) EXPECT_LE(last.validation_mse[last.best_index], mse);
  EXPECT_EQ(a.representation.matrix(), b.representation.matrix());
  EXPECT_EQ(a.best_lambda, b.best_lambda);
}

TEST(SelectOnline, ZeroOutputTieGoesToSmallerLambda) {
  std::vector<TaskDataset> train(4, data({{0.5, 0}, {0, 0.5}}, {0, 0}));
  std::vector<TaskSplit> validation{{data({{0.5, 0}}, {0}), data({{0, 0.5}}, {0})}};
  const OnlineSelection s = select_online(stream_from(train), validation, LambdaGrid({0.5, 2.0}), 4);
  for (const SelectionStep& step : s.trajectory) EXPECT_EQ(step.best_index, 0u);
  EXPECT_EQ(s.best_lambda, 0.5);
}

TEST(SelectOnline, ResultIndependentOfThreadCount) {
  const EnvironmentSpec spec = EnvironmentSpec::make(6, 5, 0.3, 5);
  const std::vector<TaskDataset> train = trains_of(sample_tasks(spec, StreamPurpose::Train, 6));
  const std::vector<TaskSplit> validation = splits_of(sample_tasks(spec, StreamPurpose::Validation, 2));
  const LambdaGrid grid = LambdaGrid::log_spaced(0.1, 10.0, 4);
  setenv("METALEARN_THREADS", "1", 1);
  const OnlineSelection a = select_online(stream_from(train), validation, grid, 6);
  setenv("METALEARN_THREADS", "3", 1);
  const OnlineSelection b = select_online(stream_from(train), validation, grid, 6);
  unsetenv("METALEARN_THREADS");
  EXPECT_EQ(a.representation.matrix(), b.representation.matrix());
  EXPECT_EQ(a.trajectory.back().validation_mse, b.trajectory.back().validation_mse);
}

TEST(BatchSelector, WarmUpdatesAndSelection) {
  const EnvironmentSpec spec = EnvironmentSpec::make(6, 5, 0.2, 6);
  const std::vector<TaskDataset> train = trains_of(sample_tasks(spec, StreamPurpose::Train, 8));
  const std::vector<TaskSplit> validation = splits_of(sample_tasks(spec, StreamPurpose::Validation, 3));
  const LambdaGrid grid = LambdaGrid::log_spaced(0.1, 10.0, 3);
  BatchSelector selector(grid);
  EXPECT_THROW(selector.select(validation, 0), Error);
  EXPECT_GT(selector.update(std::span(train).first(4)), 0);
  selector.update(train);
  const SelectionStep step = selector.select(validation, 8);
  EXPECT_EQ(step.t, 8);
  ASSERT_EQ(step.validation_mse.size(), 3u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(step.validation_mse[i], transfer_risk_estimate(selector.representation(i), validation), 1e-15);
  }
}

TEST(SelectItl, MatchesItlRisk) {
  const EnvironmentSpec spec = EnvironmentSpec::make(6, 8, 0.2, 7);
  const std::vector<TaskSplit> validation = splits_of(sample_tasks(spec, StreamPurpose::Validation, 4));
  const LambdaGrid grid = LambdaGrid::log_spaced(0.01, 10.0, 4);
  const ItlSelection s = select_itl(validation, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(s.validation_mse[i], itl_risk(validation, grid[i]));
  }
  EXPECT_EQ(s.lambda, grid[argmin_score(s.validation_mse)]);
}

TEST(CovarianceNorm, Examples) {
  std::vector<TaskDataset> e1{data({{1, 0, 0}, {1, 0, 0}}, {0, 1})};
  EXPECT_NEAR(covariance_norm_estimate(e1), 1.0, 1e-15);
  std::vector<TaskDataset> single{data({{0.6, 0.8}}, {0})};
  EXPECT_NEAR(covariance_norm_estimate(single), 1.0, 1e-15);
}

TEST(CovarianceNorm, UniformSphereIsNearOneOverD) {
  Rng rng = child_rng(8, 0, 0);
  std::vector<TaskDataset> tasks;
  for (int t = 0; t < 100; ++t) {
    Matrix X(200, 20);
    for (Eigen::Index i = 0; i < X.rows(); ++i) X.row(i) = sample_unit_sphere(20, rng).transpose();
    tasks.push_back(validate_dataset(X, Vector::Zero(200), true));
  }
  EXPECT_NEAR(covariance_norm_estimate(tasks), 0.05, 0.01);
}

TEST(OnlineBound, DecreasesWithTasksAndSamples) {
  const double base = online_bound(0.02, 0.5, 25, 50, 0.05);
  EXPECT_LT(online_bound(0.02, 0.5, 25, 100, 0.05), base);
  EXPECT_LT(online_bound(0.02, 0.5, 100, 50, 0.05), base);
  EXPECT_THROW(online_bound(0.02, 0.5, 25, 50, 0.0), Error);
}

TEST(ParallelFor, CoversEveryIndexAndRethrows) {
  std::vector<int> hits(37, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(5, [](std::size_t i) { if (i == 3) throw std::runtime_error("x"); }, 2),
               std::runtime_error);
}

}  // namespace
}  // namespace metalearn
