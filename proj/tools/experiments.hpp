#pragma once

// Experiment protocols driven by the CLI and the acceptance suite.

#include "metalearn/environments.hpp"
#include "metalearn/evaluation.hpp"
#include "metalearn/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace metalearn::experiments {

/// One method's result after T training tasks, for every replicate run.
struct MethodPoint {
  Method method = Method::OnlineLtl;
  std::int64_t T = 0;
  std::vector<double> lambda;
  std::vector<double> test_mse;
  std::vector<double> ev_pct;
  std::vector<double> wall_ms;
};

struct TrajectoryOptions {
  std::int64_t stride = 1;   // score (and re-solve batch) every stride-th task
  bool record_time = false;  // otherwise wall_ms is written as 0
  BatchOptions batch = BatchOptions::experiment();
};

/// Incremental protocol: training tasks arrive one at a time; online and batch
/// learners keep one representation per lambda and are scored on the
/// validation tasks; ITL and MTL are fixed baselines. Returns points ordered by
/// T, then method (online, batch, itl, mtl).
std::vector<MethodPoint> trajectory_trial(std::span<const TaskDataset> train,
                                          std::span<const TaskSplit> validation,
                                          std::span<const TaskSplit> test, const LambdaGrid& grid,
                                          const TrajectoryOptions& options);

struct SyntheticConfig {
  Eigen::Index d = 50;
  Eigen::Index n = 25;
  std::int64_t tasks = 50;
  std::int64_t test_tasks = 100;
  std::uint64_t seed = 0;
  int replicates = 1;
  LambdaGrid grid = default_grid();
};

/// Validation tasks are 25% of the training tasks (at least one).
std::int64_t validation_count(std::int64_t training_tasks);

/// Synthetic trajectory; replicate r uses seed + r. Points from all replicates
/// are merged into one entry per (T, method).
std::vector<MethodPoint> synthetic_trajectory(const SyntheticConfig& config,
                                              const TrajectoryOptions& options);

struct GridCell {
  std::int64_t T = 0;
  std::int64_t n = 0;
  std::vector<double> online_lambda;
  std::vector<double> online_mse;
  std::vector<double> online_ev;
  std::vector<double> itl_mse;
  std::vector<double> improvement_pct;  // 100 (R_itl - R_online) / R_itl
};

/// Final-step comparison of online LTL against ITL for every (T, n) cell.
std::vector<GridCell> synthetic_grid(const SyntheticConfig& base, std::span<const std::int64_t> tasks,
                                     std::span<const std::int64_t> samples);

struct SchoolsConfig {
  std::filesystem::path path;
  std::uint64_t split_seed = 0;
  std::optional<std::int64_t> max_tasks;
  LambdaGrid grid = default_grid();
};

struct SchoolsRun {
  SchoolsData data;
  std::vector<MethodPoint> points;
};

SchoolsRun schools_trajectory(const SchoolsConfig& config, const TrajectoryOptions& options);

struct TimingRow {
  std::int64_t T = 0;
  std::int64_t n = 0;
  double online_ms = 0.0;
  double batch_ms = 0.0;
  std::int64_t online_steps = 0;
  std::int64_t batch_iterations = 0;
  std::vector<double> lambdas;
  double online_mse = 0.0;  // best over lambdas, on the test tasks
  double batch_mse = 0.0;
};

struct TimingConfig {
  Eigen::Index d = 50;
  std::uint64_t seed = 0;
  std::int64_t test_tasks = 100;
  LambdaGrid grid = LambdaGrid({1.0});
  BatchOptions batch = BatchOptions::experiment();
};

/// Wall time of feeding T tasks to the online learners vs re-solving the
/// warm-restarted batch problem after every task. Data generation and scoring
/// are outside the timed intervals.
TimingRow timing_cell(const TimingConfig& config, std::int64_t T, std::int64_t n);

double mean(std::span<const double> values);
double stddev(std::span<const double> values);
double median(std::vector<double> values);

}  // namespace metalearn::experiments
