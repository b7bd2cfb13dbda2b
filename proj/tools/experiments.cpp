#include "experiments.hpp"

#include "metalearn/batch.hpp"
#include "metalearn/errors.hpp"
#include "metalearn/online.hpp"
#include "metalearn/ridge_loss.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

namespace metalearn::experiments {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct Sample {
  Method method;
  std::int64_t T;
  double lambda;
  double test_mse;
  double ev_pct;
  double wall_ms;
};

std::vector<TaskDataset> train_halves(const std::vector<SampledTask>& tasks) {
  std::vector<TaskDataset> out;
  out.reserve(tasks.size());
  for (const SampledTask& task : tasks) out.push_back(task.split.train);
  return out;
}

std::vector<TaskSplit> splits(const std::vector<SampledTask>& tasks) {
  std::vector<TaskSplit> out;
  out.reserve(tasks.size());
  for (const SampledTask& task : tasks) out.push_back(task.split);
  return out;
}

void merge(std::vector<MethodPoint>& into, const std::vector<MethodPoint>& trial) {
  if (into.empty()) {
    into = trial;
    return;
  }
  if (into.size() != trial.size()) {
    fail(ErrorCode::PreconditionViolated, "replicates produced different trajectories");
  }
  for (std::size_t i = 0; i < into.size(); ++i) {
    auto append = [](std::vector<double>& a, const std::vector<double>& b) {
      a.insert(a.end(), b.begin(), b.end());
    };
    append(into[i].lambda, trial[i].lambda);
    append(into[i].test_mse, trial[i].test_mse);
    append(into[i].ev_pct, trial[i].ev_pct);
    append(into[i].wall_ms, trial[i].wall_ms);
  }
}

}  // namespace

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::int64_t validation_count(std::int64_t training_tasks) {
  return std::max<std::int64_t>(1, training_tasks / 4);
}

std::vector<MethodPoint> trajectory_trial(std::span<const TaskDataset> train,
                                          std::span<const TaskSplit> validation,
                                          std::span<const TaskSplit> test, const LambdaGrid& grid,
                                          const TrajectoryOptions& options) {
  if (train.empty() || validation.empty() || test.empty()) {
    fail(ErrorCode::EmptyInput, "trajectory needs training, validation and test tasks");
  }
  const auto T = static_cast<std::int64_t>(train.size());
  auto stamp = [&](double ms) { return options.record_time ? ms : 0.0; };

  // Fixed baselines.
  Clock::time_point start = Clock::now();
  const ItlSelection itl = select_itl(validation, grid);
  const double itl_mse = itl_risk(test, itl.lambda);
  const double itl_ev = explained_variance_pct(
      test, [&](const TaskDataset& Z) { return itl_fit(Z, itl.lambda); });
  const double itl_ms = elapsed_ms(start);

  start = Clock::now();
  const MtlResult mtl = mtl_fit(test, grid.values(), options.batch);
  const double mtl_ev = explained_variance_pct(mtl.representation, test);
  const double mtl_ms = elapsed_ms(start);

  std::vector<Sample> samples;
  BatchSelector batch(grid, options.batch);
  double online_ms = 0.0;
  double batch_ms = 0.0;
  Clock::time_point online_since = Clock::now();

  SelectionOptions selection;
  selection.stride = options.stride;
  selection.on_step = [&](const SelectionStep& step, const Representation& online_rep) {
    online_ms += elapsed_ms(online_since);
    const std::int64_t t = step.t;
    samples.push_back({Method::OnlineLtl, t, step.best_lambda, transfer_risk_estimate(online_rep, test),
                       explained_variance_pct(online_rep, test), stamp(online_ms)});

    const Clock::time_point batch_start = Clock::now();
    batch.update(train.first(static_cast<std::size_t>(t)));
    const SelectionStep chosen = batch.select(validation, t);
    batch_ms += elapsed_ms(batch_start);
    const Representation& batch_rep = batch.representation(chosen.best_index);
    samples.push_back({Method::BatchLtl, t, chosen.best_lambda, transfer_risk_estimate(batch_rep, test),
                       explained_variance_pct(batch_rep, test), stamp(batch_ms)});

    samples.push_back({Method::Itl, t, itl.lambda, itl_mse, itl_ev, stamp(itl_ms)});
    samples.push_back({Method::Mtl, t, mtl.lambda, mtl.test_mse, mtl_ev, stamp(mtl_ms)});
    online_since = Clock::now();
  };
  select_online(stream_from(train), validation, grid, T, selection);

  std::vector<MethodPoint> points;
  points.reserve(samples.size());
  for (const Sample& s : samples) {
    points.push_back(MethodPoint{s.method, s.T, {s.lambda}, {s.test_mse}, {s.ev_pct}, {s.wall_ms}});
  }
  return points;
}

std::vector<MethodPoint> synthetic_trajectory(const SyntheticConfig& config,
                                              const TrajectoryOptions& options) {
  if (config.tasks < 1 || config.test_tasks < 1 || config.replicates < 1) {
    fail(ErrorCode::InvalidParameter, "tasks, test tasks and replicates must be >= 1");
  }
  std::vector<MethodPoint> merged;
  for (int r = 0; r < config.replicates; ++r) {
    const EnvironmentSpec spec =
        EnvironmentSpec::make(config.d, config.n, std::sqrt(0.2), config.seed + static_cast<std::uint64_t>(r));
    const auto train = train_halves(sample_tasks(spec, StreamPurpose::Train, static_cast<std::size_t>(config.tasks)));
    const auto validation = splits(sample_tasks(
        spec, StreamPurpose::Validation, static_cast<std::size_t>(validation_count(config.tasks))));
    const auto test = splits(sample_tasks(spec, StreamPurpose::Test, static_cast<std::size_t>(config.test_tasks)));
    merge(merged, trajectory_trial(train, validation, test, config.grid, options));
  }
  return merged;
}

std::vector<GridCell> synthetic_grid(const SyntheticConfig& base, std::span<const std::int64_t> tasks,
                                     std::span<const std::int64_t> samples) {
  if (base.replicates < 1 || base.test_tasks < 1) {
    fail(ErrorCode::InvalidParameter, "replicates and test tasks must be >= 1");
  }
  std::vector<GridCell> cells;
  for (std::int64_t T : tasks) {
    for (std::int64_t n : samples) {
      if (T < 1 || n < 1) fail(ErrorCode::InvalidParameter, "grid cells need T, n >= 1");
      GridCell cell{T, n, {}, {}, {}, {}, {}};
      for (int r = 0; r < base.replicates; ++r) {
        const EnvironmentSpec spec =
            EnvironmentSpec::make(base.d, n, std::sqrt(0.2), base.seed + static_cast<std::uint64_t>(r));
        const auto train = train_halves(sample_tasks(spec, StreamPurpose::Train, static_cast<std::size_t>(T)));
        const auto validation = splits(
            sample_tasks(spec, StreamPurpose::Validation, static_cast<std::size_t>(validation_count(T))));
        const auto test = splits(sample_tasks(spec, StreamPurpose::Test, static_cast<std::size_t>(base.test_tasks)));

        SelectionOptions selection;
        selection.stride = T;  // only the final representation is reported
        const OnlineSelection online = select_online(stream_from(train), validation, base.grid, T, selection);
        const double online_mse = transfer_risk_estimate(online.representation, test);
        const double itl_mse = itl_risk(test, select_itl(validation, base.grid).lambda);

        cell.online_lambda.push_back(online.best_lambda);
        cell.online_mse.push_back(online_mse);
        cell.online_ev.push_back(explained_variance_pct(online.representation, test));
        cell.itl_mse.push_back(itl_mse);
        cell.improvement_pct.push_back(100.0 * (itl_mse - online_mse) / itl_mse);
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

SchoolsRun schools_trajectory(const SchoolsConfig& config, const TrajectoryOptions& options) {
  SchoolsRun run{load_schools(config.path, config.split_seed), {}};
  std::span<const TaskDataset> train = run.data.train_tasks;
  if (config.max_tasks) {
    if (*config.max_tasks < 1) fail(ErrorCode::InvalidParameter, "--tasks must be >= 1");
    train = train.first(std::min(train.size(), static_cast<std::size_t>(*config.max_tasks)));
  }
  run.points = trajectory_trial(train, run.data.validation_tasks, run.data.test_tasks, config.grid, options);
  return run;
}

TimingRow timing_cell(const TimingConfig& config, std::int64_t T, std::int64_t n) {
  if (T < 1 || n < 1) fail(ErrorCode::InvalidParameter, "timing cells need T, n >= 1");
  const EnvironmentSpec spec = EnvironmentSpec::make(config.d, n, std::sqrt(0.2), config.seed);
  const auto train = train_halves(sample_tasks(spec, StreamPurpose::Train, static_cast<std::size_t>(T)));
  const auto test = splits(sample_tasks(spec, StreamPurpose::Test, static_cast<std::size_t>(config.test_tasks)));

  TimingRow row;
  row.T = T;
  row.n = n;
  row.lambdas = config.grid.values();
  row.online_mse = std::numeric_limits<double>::infinity();
  row.batch_mse = std::numeric_limits<double>::infinity();

  for (double lambda : config.grid.values()) {
    OnlineLearnerState learner = init_learner(spec.d, lambda);
    const Clock::time_point online_start = Clock::now();
    for (const TaskDataset& Z : train) step(learner, Z);
    row.online_ms += elapsed_ms(online_start);
    row.online_steps += T;
    row.online_mse = std::min(row.online_mse, transfer_risk_estimate(learner.output, test));

    std::optional<Representation> warm;
    const Clock::time_point batch_start = Clock::now();
    for (std::int64_t t = 1; t <= T; ++t) {
      BatchResult fit = solve(std::span(train).first(static_cast<std::size_t>(t)), lambda, warm, config.batch);
      row.batch_iterations += fit.iterations;
      warm = std::move(fit.representation);
    }
    row.batch_ms += elapsed_ms(batch_start);
    row.batch_mse = std::min(row.batch_mse, transfer_risk_estimate(*warm, test));
  }
  return row;
}

}  // namespace metalearn::experiments
