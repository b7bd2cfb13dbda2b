#pragma once

// Batch learning-to-learn: projected gradient descent on the multitask
// empirical risk E_Z(D) = (1/T) sum_t L_{Z_t}(D), plus the ITL and MTL
// baselines built on the same ridge machinery.

#include "metalearn/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace metalearn {

struct BatchOptions {
  double tol = 1e-5;        // gradient-map norm, always measured at `step`
  std::int64_t max_iter = 500;
  double step = 1.0 / 6.0;  // 1 / Lipschitz constant of the gradient
  bool record_history = false;
  /// Backtracking steps in [step, max_step] instead of the constant `step`.
  /// Every accepted step satisfies the sufficient-decrease condition, and
  /// `step` itself always does, so the objective stays monotone.
  bool adaptive_step = false;
  double max_step = 1e4;

  static BatchOptions experiment() { return {}; }
  static BatchOptions comparator() {
    BatchOptions options;
    options.tol = 1e-8;
    options.max_iter = 5000;
    options.adaptive_step = true;
    return options;
  }
};

struct BatchResult {
  Representation representation;
  double objective = 0.0;
  double gradient_map_norm = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // filled when record_history is set
};

/// Objective value and gradient of the multitask empirical risk, summed in
/// task order.
struct MultitaskEval {
  double objective = 0.0;
  Matrix gradient;
};

MultitaskEval multitask_objective(const Representation& D, std::span<const TaskDataset> datasets);

/// Minimises the multitask empirical risk over the constraint set for lambda,
/// starting from `warm_start` (projected onto the set) or from I/(lambda d).
/// Hitting max_iter is reported through `converged`, not thrown.
BatchResult solve(std::span<const TaskDataset> datasets, double lambda,
                  const std::optional<Representation>& warm_start = std::nullopt,
                  const BatchOptions& options = {});

/// Standard ridge regression with penalty lambda_itl ||w||^2, i.e. the
/// representation I / lambda_itl.
LinearPredictor itl_fit(const TaskDataset& Z, double lambda_itl);

struct MtlResult {
  double lambda = 0.0;
  Representation representation;
  std::vector<LinearPredictor> predictors;
  double test_mse = 0.0;
  std::vector<double> per_lambda_mse;  // aligned with the grid
};

/// Oracle baseline: for every lambda in the grid, learns D on the train
/// halves of the evaluation tasks themselves and keeps the lambda with the
/// lowest test-half MSE.
MtlResult mtl_fit(std::span<const TaskSplit> tasks, std::span<const double> lambda_grid,
                  const BatchOptions& options = {});

}  // namespace metalearn
