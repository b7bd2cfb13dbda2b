#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "metalearn/environments.hpp"
#include "metalearn/errors.hpp"
#include "metalearn/online.hpp"
#include "oracles.hpp"

namespace metalearn {
namespace {

using testing::diag;

std::vector<TaskDataset> compliant_tasks(int count, Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng = child_rng(seed, 0, 0);
  std::vector<TaskDataset> tasks;
  for (int t = 0; t < count; ++t) tasks.push_back(oracle::random_compliant_dataset(n, d, rng));
  return tasks;
}

std::vector<TaskDataset> zero_output_tasks(int count, Eigen::Index d) {
  std::vector<TaskDataset> tasks;
  for (int t = 0; t < count; ++t) {
    tasks.push_back(validate_dataset(Matrix::Identity(d, d) * 0.5, Vector::Zero(d), true));
  }
  return tasks;
}

TEST(InitLearner, IsotropicStart) {
  EXPECT_EQ(init_learner(2, 1.0).current.matrix(), diag({0.5, 0.5}));
  EXPECT_EQ(init_learner(1, 2.0).current.matrix(), diag({0.5}));
  const OnlineLearnerState s = init_learner(7, 0.3);
  EXPECT_NEAR(s.current.matrix().trace(), 1.0 / 0.3, 1e-12);
  EXPECT_EQ(s.t, 1);
}

TEST(StepSize, Schedule) {
  EXPECT_NEAR(step_size(0.5, 1), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(step_size(1.0, 8), 0.25, 1e-15);
}

TEST(Step, ZeroOutputsLeaveIterateUnchanged) {
  OnlineLearnerState s = init_learner(3, 1.0);
  const Matrix start = s.current.matrix();
  for (const TaskDataset& Z : zero_output_tasks(4, 3)) step(s, Z);
  EXPECT_EQ(s.current.matrix(), start);
  EXPECT_EQ(s.cumulative_loss, 0.0);
  EXPECT_EQ(s.t, 5);
}

TEST(Step, IteratesStayFeasible) {
  OnlineLearnerState s = init_learner(4, 0.5);
  for (const TaskDataset& Z : compliant_tasks(30, 5, 4, 20)) {
    step(s, Z);
    EXPECT_FALSE(feasibility_violation(s.current.matrix(), 0.5).has_value());
  }
}

TEST(Step, AuditAverageIsMeanOfIterates) {
  OnlineLearnerState s = init_learner(3, 1.0, AuditMode::On);
  for (const TaskDataset& Z : compliant_tasks(12, 4, 3, 21)) step(s, Z);
  ASSERT_EQ(s.ledger.iterates.size(), 13u);
  ASSERT_EQ(s.ledger.retained.size(), 12u);
  EXPECT_EQ(s.ledger.iterates.back(), s.current.matrix());
  Matrix paid = Matrix::Zero(3, 3);
  for (std::size_t k = 0; k < 12; ++k) paid += s.ledger.iterates[k];
  const Matrix all = paid + s.current.matrix();
  EXPECT_LE((s.output.matrix() - paid / 12.0).norm(), 1e-13);
  EXPECT_LE((s.average.matrix() - all / 13.0).norm(), 1e-13);
}

TEST(Step, WarnsOnceForNonCompliantData) {
  int warnings = 0;
  WarningHandler previous = set_warning_handler([&](std::string_view) { ++warnings; });
  OnlineLearnerState s = init_learner(1, 1.0);
  for (int k = 0; k < 3; ++k) step(s, testing::data({{2.0}}, {3.0}));
  set_warning_handler(previous);
  EXPECT_EQ(warnings, 1);
}

TEST(Step, DimensionMismatchIsReported) {
  OnlineLearnerState s = init_learner(2, 1.0);
  EXPECT_THROW(step(s, testing::data({{0.1, 0.1, 0.1}}, {0.5})), Error);
}

TEST(RunOnline, SingleTaskReturnsInitialIterate) {
  const auto tasks = compliant_tasks(1, 5, 3, 22);
  EXPECT_EQ(run_online(stream_from(tasks), 3, 2.0, 1).representation.matrix(), init_learner(3, 2.0).current.matrix());
}

TEST(RunOnline, ZeroOutputStreamStaysAtInit) {
  const auto tasks = zero_output_tasks(6, 2);
  const OnlineResult r = run_online(stream_from(tasks), 2, 1.0, 6);
  EXPECT_LE((r.representation.matrix() - diag({0.5, 0.5})).norm(), 1e-15);
}

TEST(RunOnline, DeterministicAndStreamLengthChecked) {
  const auto tasks = compliant_tasks(10, 6, 4, 23);
  const OnlineResult a = run_online(stream_from(tasks), 4, 0.7, 10);
  const OnlineResult b = run_online(stream_from(tasks), 4, 0.7, 10);
  EXPECT_EQ(a.representation.matrix(), b.representation.matrix());
  EXPECT_EQ(a.ledger.losses, b.ledger.losses);
  try {
    run_online(stream_from(tasks), 4, 0.7, 11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StreamExhausted);
  }
}

TEST(Regret, ZeroOutputsGiveZeroRegret) {
  const auto tasks = zero_output_tasks(5, 2);
  OnlineResult r = run_online(stream_from(tasks), 2, 1.0, 5, AuditMode::On);
  EXPECT_EQ(regret(r.ledger, 1.0).regret, 0.0);
}

TEST(Regret, SingleTaskIsNonNegative) {
  const auto tasks = compliant_tasks(1, 6, 3, 24);
  OnlineResult r = run_online(stream_from(tasks), 3, 1.0, 1, AuditMode::On);
  const RegretReport report = regret(r.ledger, 1.0);
  EXPECT_GE(report.regret, -1e-9);
  EXPECT_TRUE(report.comparator_converged);
  EXPECT_NEAR(report.average_loss - report.comparator, report.regret, 1e-15);
}

TEST(Regret, WithinBoundOnCompliantStream) {
  const auto tasks = compliant_tasks(100, 8, 5, 25);
  for (double lambda : {0.2, 1.0}) {
    OnlineResult r = run_online(stream_from(tasks), 5, lambda, 100, AuditMode::On);
    const RegretReport report = regret(r.ledger, lambda);
    EXPECT_TRUE(report.comparator_converged);
    EXPECT_GE(report.regret, -1e-6);
    EXPECT_LE(report.regret, regret_bound(lambda, 100));
    ASSERT_TRUE(r.ledger.comparator_value.has_value());
  }
}

TEST(Regret, RequiresAuditMode) {
  const auto tasks = compliant_tasks(3, 4, 2, 26);
  OnlineResult r = run_online(stream_from(tasks), 2, 1.0, 3);
  try {
    regret(r.ledger, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AuditModeOff);
  }
}

TEST(RegretBound, Value) { EXPECT_NEAR(regret_bound(1.0, 200), 0.4, 1e-12); }

}  // namespace
}  // namespace metalearn
