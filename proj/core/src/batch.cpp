#include "metalearn/batch.hpp"

#include "metalearn/errors.hpp"
#include "metalearn/projection.hpp"
#include "metalearn/ridge_loss.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace metalearn {

MultitaskEval multitask_objective(const Representation& D, std::span<const TaskDataset> datasets) {
  if (datasets.empty()) fail(ErrorCode::InvalidParameter, "multitask objective needs >= 1 dataset");
  MultitaskEval out;
  out.gradient = Matrix::Zero(D.dim(), D.dim());
  for (const TaskDataset& Z : datasets) {
    const LossEval eval = meta_loss(D, Z);
    out.objective += eval.value;
    out.gradient += meta_gradient(eval, Z);
  }
  const auto T = static_cast<double>(datasets.size());
  out.objective /= T;
  out.gradient /= T;
  return out;
}

BatchResult solve(std::span<const TaskDataset> datasets, double lambda,
                  const std::optional<Representation>& warm_start, const BatchOptions& options) {
  if (datasets.empty()) fail(ErrorCode::InvalidParameter, "batch solve needs >= 1 dataset");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorCode::InvalidParameter, "lambda must be positive and finite");
  }
  if (options.max_iter < 1 || !(options.step > 0.0) || options.tol < 0.0) {
    fail(ErrorCode::InvalidParameter, "invalid batch solver options");
  }
  const Eigen::Index d = datasets.front().d();
  for (const TaskDataset& Z : datasets) {
    if (Z.d() != d) fail(ErrorCode::DimensionMismatch, "datasets disagree on input dimension");
  }

  Representation D = Representation::isotropic(d, lambda);
  if (warm_start) {
    if (warm_start->dim() != d) {
      fail(ErrorCode::DimensionMismatch, "warm start has the wrong dimension");
    }
    D = project(warm_start->matrix(), lambda);
  }

  BatchResult result{D, 0.0, std::numeric_limits<double>::infinity(), 0, false, {}};
  MultitaskEval eval = multitask_objective(D, datasets);
  double trial_step = options.step;
  for (std::int64_t iter = 1;; ++iter) {
    if (options.record_history) result.objective_history.push_back(eval.objective);

    Representation next = project(D.matrix() - options.step * eval.gradient, lambda);
    const double gradient_map = (D.matrix() - next.matrix()).norm() / options.step;

    result.iterations = iter;
    result.objective = eval.objective;
    result.gradient_map_norm = gradient_map;
    if (gradient_map <= options.tol || iter >= options.max_iter) {
      result.converged = gradient_map <= options.tol;
      result.representation = std::move(D);
      return result;
    }

    if (options.adaptive_step) {
      // Largest tried step whose quadratic upper model holds; falls back to
      // `step`, where the model holds for any 6-smooth objective.
      for (trial_step = std::min(2.0 * trial_step, options.max_step); trial_step > options.step;
           trial_step *= 0.5) {
        Representation candidate = project(D.matrix() - trial_step * eval.gradient, lambda);
        const Matrix move = candidate.matrix() - D.matrix();
        MultitaskEval candidate_eval = multitask_objective(candidate, datasets);
        const double model = eval.objective + (eval.gradient.array() * move.array()).sum() +
                             move.squaredNorm() / (2.0 * trial_step);
        if (candidate_eval.objective <= model) {
          next = std::move(candidate);
          eval = std::move(candidate_eval);
          break;
        }
      }
      if (trial_step <= options.step) {
        trial_step = options.step;
        eval = multitask_objective(next, datasets);
      }
    } else {
      eval = multitask_objective(next, datasets);
    }
    D = std::move(next);
  }
}

LinearPredictor itl_fit(const TaskDataset& Z, double lambda_itl) {
  if (!(lambda_itl > 0.0) || !std::isfinite(lambda_itl)) {
    fail(ErrorCode::InvalidParameter, "ITL regularisation must be positive and finite");
  }
  const Eigen::Index d = Z.d();
  const Representation D = Representation::assume_valid(
      Matrix::Identity(d, d) / lambda_itl, lambda_itl / static_cast<double>(d));
  return ridge_solve(D, Z);
}

MtlResult mtl_fit(std::span<const TaskSplit> tasks, std::span<const double> lambda_grid,
                  const BatchOptions& options) {
  if (tasks.empty()) fail(ErrorCode::InvalidParameter, "MTL needs >= 1 task");
  if (lambda_grid.empty()) fail(ErrorCode::InvalidParameter, "MTL needs a nonempty lambda grid");

  std::vector<TaskDataset> train;
  train.reserve(tasks.size());
  for (const TaskSplit& task : tasks) train.push_back(task.train);

  std::optional<MtlResult> best;
  std::vector<double> per_lambda;
  per_lambda.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    BatchResult fit = solve(train, lambda, std::nullopt, options);
    std::vector<LinearPredictor> predictors;
    predictors.reserve(tasks.size());
    double mse = 0.0;
    for (const TaskSplit& task : tasks) {
      predictors.push_back(ridge_solve(fit.representation, task.train));
      mse += empirical_risk(predictors.back(), task.test);
    }
    mse /= static_cast<double>(tasks.size());
    per_lambda.push_back(mse);
    if (!best || mse < best->test_mse) {
      best = MtlResult{lambda, std::move(fit.representation), std::move(predictors), mse, {}};
    }
  }
  best->per_lambda_mse = std::move(per_lambda);
  return std::move(*best);
}

}  // namespace metalearn
