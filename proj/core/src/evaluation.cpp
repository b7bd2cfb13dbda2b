#include "metalearn/evaluation.hpp"

#include "metalearn/errors.hpp"
#include "metalearn/parallel.hpp"
#include "metalearn/ridge_loss.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace metalearn {

LambdaGrid::LambdaGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) fail(ErrorCode::InvalidParameter, "lambda grid is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      fail(ErrorCode::InvalidParameter, "lambda grid values must be positive and finite");
    }
    if (i > 0 && !(values_[i] > values_[i - 1])) {
      fail(ErrorCode::InvalidParameter, "lambda grid must be strictly increasing");
    }
  }
}

LambdaGrid LambdaGrid::log_spaced(double min, double max, std::size_t count) {
  if (count == 0 || !(min > 0.0) || !(max >= min) || (count > 1 && !(max > min))) {
    fail(ErrorCode::InvalidParameter, "log grid needs 0 < min < max and count >= 1");
  }
  std::vector<double> values(count);
  if (count == 1) {
    values[0] = min;
    return LambdaGrid(std::move(values));
  }
  const double lo = std::log10(min);
  const double hi = std::log10(max);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  values.front() = min;
  values.back() = max;
  return LambdaGrid(std::move(values));
}

LambdaGrid default_grid() { return LambdaGrid::log_spaced(1e-6, 1e3, 30); }

double transfer_risk_estimate(const Representation& D, std::span<const TaskSplit> tasks) {
  if (tasks.empty()) fail(ErrorCode::EmptyInput, "transfer risk needs >= 1 task");
  double total = 0.0;
  for (const TaskSplit& task : tasks) {
    if (task.train.d() != D.dim() || task.test.d() != D.dim()) {
      fail(ErrorCode::DimensionMismatch, "task dimension differs from the representation");
    }
    total += empirical_risk(ridge_solve(D, task.train), task.test);
  }
  return total / static_cast<double>(tasks.size());
}

double explained_variance_pct(std::span<const TaskSplit> tasks,
                              const std::function<LinearPredictor(const TaskDataset&)>& fit) {
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskDataset& test = tasks[i].test;
    const Vector& y = test.outputs();
    const double variance = (y.array() - y.mean()).square().mean();
    if (!(variance > 0.0)) {
      warn("task " + std::to_string(i) + " has constant test outputs; skipped for explained variance");
      continue;
    }
    const double mse = empirical_risk(fit(tasks[i].train), test);
    total += 100.0 * (1.0 - mse / variance);
    ++counted;
  }
  if (counted == 0) fail(ErrorCode::AllTasksDegenerate, "every task has constant test outputs");
  return total / static_cast<double>(counted);
}

double explained_variance_pct(const Representation& D, std::span<const TaskSplit> tasks) {
  return explained_variance_pct(tasks, [&D](const TaskDataset& Z) { return ridge_solve(D, Z); });
}

std::size_t argmin_score(std::span<const double> scores) {
  if (scores.empty()) fail(ErrorCode::EmptyInput, "no scores to compare");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[best]) best = i;
  }
  return best;
}

OnlineSelection select_online(const TaskStream& stream, std::span<const TaskSplit> validation,
                              const LambdaGrid& grid, std::int64_t T,
                              const SelectionOptions& options) {
  if (T < 1) fail(ErrorCode::InvalidParameter, "T must be >= 1");
  if (validation.empty()) fail(ErrorCode::EmptyInput, "model selection needs validation tasks");
  if (options.stride < 1) fail(ErrorCode::InvalidParameter, "stride must be >= 1");
  const Eigen::Index d = validation.front().train.d();

  std::vector<OnlineLearnerState> learners;
  learners.reserve(grid.size());
  for (double lambda : grid.values()) learners.push_back(init_learner(d, lambda));

  OnlineSelection result{0.0, learners.front().output, {}};
  std::vector<double> scores(grid.size());
  for (std::int64_t t = 1; t <= T; ++t) {
    std::optional<TaskDataset> Z = stream();
    if (!Z) {
      std::ostringstream os;
      os << "stream ended after " << t - 1 << " of " << T << " datasets";
      fail(ErrorCode::StreamExhausted, os.str());
    }
    parallel_for(learners.size(), [&](std::size_t i) { step(learners[i], *Z); });

    if (t % options.stride != 0 && t != T) continue;
    parallel_for(learners.size(), [&](std::size_t i) {
      scores[i] = transfer_risk_estimate(learners[i].output, validation);
    });
    SelectionStep selected;
    selected.t = t;
    selected.validation_mse = scores;
    selected.best_index = argmin_score(scores);
    selected.best_lambda = grid[selected.best_index];
    if (options.on_step) options.on_step(selected, learners[selected.best_index].output);
    result.trajectory.push_back(std::move(selected));
  }

  const SelectionStep& last = result.trajectory.back();
  result.best_lambda = last.best_lambda;
  result.representation = learners[last.best_index].output;
  return result;
}

BatchSelector::BatchSelector(const LambdaGrid& grid, BatchOptions options)
    : grid_(grid), options_(options), solutions_(grid.size()) {}

std::int64_t BatchSelector::update(std::span<const TaskDataset> tasks) {
  std::vector<std::int64_t> iterations(grid_.size(), 0);
  parallel_for(grid_.size(), [&](std::size_t i) {
    BatchResult fit = solve(tasks, grid_[i], solutions_[i], options_);
    iterations[i] = fit.iterations;
    solutions_[i] = std::move(fit.representation);
  });
  std::int64_t total = 0;
  for (std::int64_t k : iterations) total += k;
  return total;
}

SelectionStep BatchSelector::select(std::span<const TaskSplit> validation, std::int64_t t) const {
  SelectionStep selected;
  selected.t = t;
  selected.validation_mse.resize(grid_.size());
  parallel_for(grid_.size(), [&](std::size_t i) {
    selected.validation_mse[i] = transfer_risk_estimate(representation(i), validation);
  });
  selected.best_index = argmin_score(selected.validation_mse);
  selected.best_lambda = grid_[selected.best_index];
  return selected;
}

const Representation& BatchSelector::representation(std::size_t index) const {
  if (index >= solutions_.size() || !solutions_[index]) {
    fail(ErrorCode::PreconditionViolated, "batch selector has not been updated yet");
  }
  return *solutions_[index];
}

double itl_risk(std::span<const TaskSplit> tasks, double lambda_itl) {
  if (tasks.empty()) fail(ErrorCode::EmptyInput, "ITL risk needs >= 1 task");
  double total = 0.0;
  for (const TaskSplit& task : tasks) total += empirical_risk(itl_fit(task.train, lambda_itl), task.test);
  return total / static_cast<double>(tasks.size());
}

ItlSelection select_itl(std::span<const TaskSplit> validation, const LambdaGrid& grid) {
  if (validation.empty()) fail(ErrorCode::EmptyInput, "ITL selection needs validation tasks");
  ItlSelection out;
  out.validation_mse.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out.validation_mse[i] = itl_risk(validation, grid[i]);
  out.lambda = grid[argmin_score(out.validation_mse)];
  return out;
}

double covariance_norm_estimate(std::span<const TaskDataset> tasks) {
  if (tasks.empty()) fail(ErrorCode::EmptyInput, "covariance estimate needs >= 1 dataset");
  const Eigen::Index d = tasks.front().d();
  Matrix second_moment = Matrix::Zero(d, d);
  double count = 0.0;
  for (const TaskDataset& Z : tasks) {
    if (Z.d() != d) fail(ErrorCode::DimensionMismatch, "datasets disagree on input dimension");
    second_moment.selfadjointView<Eigen::Lower>().rankUpdate(Z.inputs().transpose());
    count += static_cast<double>(Z.n());
  }
  second_moment = second_moment.selfadjointView<Eigen::Lower>();
  second_moment /= count;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(second_moment, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) fail(ErrorCode::EigenFailure, "eigendecomposition failed");
  return eig.eigenvalues().maxCoeff();
}

double online_bound(double covariance_norm, double lambda, double n, double T, double delta) {
  if (!(lambda > 0.0) || !(n > 0.0) || !(T > 0.0) || !(delta > 0.0) || delta > 1.0 ||
      !(covariance_norm >= 0.0)) {
    fail(ErrorCode::InvalidParameter, "bound needs lambda, n, T > 0, delta in (0, 1], ||C|| >= 0");
  }
  const double within = 4.0 * std::sqrt(2.0 * std::numbers::pi) * std::sqrt(covariance_norm) *
                        (1.0 + std::sqrt(lambda)) / (lambda * std::sqrt(n));
  const double across = 4.0 * std::sqrt(2.0) / (lambda * std::sqrt(T));
  const double confidence = std::sqrt(8.0 * std::log(2.0 / delta) / T);
  return within + across + confidence;
}

}  // namespace metalearn
