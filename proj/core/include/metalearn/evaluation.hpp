#pragma once

// Transfer-risk estimates, metrics and the lambda-grid model selection that
// keeps one learner per candidate value and scores them on validation tasks.

#include "metalearn/batch.hpp"
#include "metalearn/online.hpp"
#include "metalearn/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace metalearn {

class LambdaGrid {
 public:
  /// Values must be positive, finite and strictly increasing.
  explicit LambdaGrid(std::vector<double> values);

  /// `count` log-spaced values from `min` to `max`, both endpoints included.
  static LambdaGrid log_spaced(double min, double max, std::size_t count);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// 30 values log-spaced over [1e-6, 1e3].
LambdaGrid default_grid();

/// Mean over tasks of the test-half risk of ridge_solve(D, train half).
double transfer_risk_estimate(const Representation& D, std::span<const TaskSplit> tasks);

/// Mean over tasks of 100 (1 - MSE_test / Var(y_test)) for the predictors
/// produced by `fit`. Tasks with constant test outputs are skipped.
double explained_variance_pct(std::span<const TaskSplit> tasks,
                              const std::function<LinearPredictor(const TaskDataset&)>& fit);

/// Explained variance of the ridge predictors induced by D.
double explained_variance_pct(const Representation& D, std::span<const TaskSplit> tasks);

/// Index of the smallest score; ties go to the smaller index (smaller lambda).
std::size_t argmin_score(std::span<const double> scores);

struct SelectionStep {
  std::int64_t t = 0;  // tasks consumed so far
  std::size_t best_index = 0;
  double best_lambda = 0.0;
  std::vector<double> validation_mse;  // one per grid value
};

struct SelectionOptions {
  /// Validation scoring after every `stride`-th task (the last task is always
  /// scored).
  std::int64_t stride = 1;
  /// Called after every scored step with the currently selected output.
  std::function<void(const SelectionStep&, const Representation&)> on_step;
};

struct OnlineSelection {
  double best_lambda = 0.0;
  Representation representation;
  std::vector<SelectionStep> trajectory;
};

/// Feeds every incoming dataset to one online learner per lambda and keeps the
/// learner whose averaged representation has the lowest validation transfer
/// risk.
OnlineSelection select_online(const TaskStream& stream, std::span<const TaskSplit> validation,
                              const LambdaGrid& grid, std::int64_t T,
                              const SelectionOptions& options = {});

/// Batch counterpart: per lambda, a warm-restarted solve over all tasks seen so
/// far.
class BatchSelector {
 public:
  BatchSelector(const LambdaGrid& grid, BatchOptions options = BatchOptions::experiment());

  /// Re-solves every lambda on `tasks`, each starting from its previous
  /// solution. Returns the total number of projected-gradient iterations.
  std::int64_t update(std::span<const TaskDataset> tasks);

  /// Scores every lambda on `validation`; ties go to the smaller lambda.
  SelectionStep select(std::span<const TaskSplit> validation, std::int64_t t) const;

  const Representation& representation(std::size_t index) const;
  const LambdaGrid& grid() const noexcept { return grid_; }

 private:
  LambdaGrid grid_;
  BatchOptions options_;
  std::vector<std::optional<Representation>> solutions_;
};

struct ItlSelection {
  double lambda = 0.0;
  std::vector<double> validation_mse;
};

/// Chooses the ridge penalty by validation transfer risk.
ItlSelection select_itl(std::span<const TaskSplit> validation, const LambdaGrid& grid);

/// Mean test-half MSE of per-task ridge regression with penalty lambda_itl.
double itl_risk(std::span<const TaskSplit> tasks, double lambda_itl);

/// Largest eigenvalue of the pooled second-moment matrix of all inputs.
double covariance_norm_estimate(std::span<const TaskDataset> tasks);

/// Online excess transfer risk bound value for reporting:
///   4 sqrt(2 pi) ||C||^{1/2} (1 + sqrt(lambda)) / (lambda sqrt(n))
///   + 4 sqrt(2) / (lambda sqrt(T)) + sqrt(8 log(2 / delta) / T).
double online_bound(double covariance_norm, double lambda, double n, double T, double delta);

}  // namespace metalearn
