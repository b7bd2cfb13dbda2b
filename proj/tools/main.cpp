// metalearn: experiment driver for online and batch learning-to-learn.
//
//   metalearn synth   --mode trajectory|grid ...
//   metalearn schools --schools PATH ...
//   metalearn timing  ...
//   metalearn check   [--suite NAME] ...
//
// Exit codes: 0 success, 1 check failure, 2 usage error, 3 runtime error.

#include "checks.hpp"
#include "csv.hpp"
#include "experiments.hpp"

#include "metalearn/errors.hpp"
#include "metalearn/evaluation.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

namespace {

using namespace metalearn;
namespace ex = metalearn::experiments;

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string mode = "trajectory";
  std::vector<std::int64_t> tasks;
  std::vector<std::int64_t> samples;
  std::int64_t dim = 50;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  std::string lambda_grid;
  std::string output;
  int replicates = 0;  // 0: command default
  std::string schools;
  std::string suite = "all";
  int trials = 0;      // 0: suite default
  int cells = 0;       // 0: all cells
  std::vector<double> lambdas;
  std::int64_t stride = 1;
  std::int64_t test_tasks = 100;
  bool record_time = false;
};

LambdaGrid parse_grid(const std::string& spec) {
  if (spec.empty()) return default_grid();
  std::stringstream in(spec);
  std::string field;
  std::vector<std::string> parts;
  while (std::getline(in, field, ',')) parts.push_back(field);
  if (parts.size() != 3) throw UsageError("--lambda-grid expects min,max,count");
  try {
    const double lo = std::stod(parts[0]);
    const double hi = std::stod(parts[1]);
    const long count = std::stol(parts[2]);
    if (count < 1) throw UsageError("--lambda-grid count must be >= 1");
    return LambdaGrid::log_spaced(lo, hi, static_cast<std::size_t>(count));
  } catch (const metalearn::Error& e) {
    throw UsageError(std::string("--lambda-grid: ") + e.what());
  } catch (const std::logic_error&) {
    throw UsageError("--lambda-grid expects numbers: min,max,count");
  }
}

/// Opens --output (or stdout) for the duration of one command.
class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw UsageError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<std::string> base_fields(Method method, double lambda, std::int64_t T, std::int64_t n,
                                     std::int64_t d, std::uint64_t seed, double mse, double ev,
                                     double wall_ms) {
  return {std::string(to_string(method)), csv::real(lambda), csv::integer(T), csv::integer(n),
          csv::integer(d), std::to_string(seed), csv::real(mse), csv::real(ev), csv::real(wall_ms)};
}

void write_points(std::ostream& out, const std::vector<ex::MethodPoint>& points, std::int64_t n,
                  std::int64_t d, std::uint64_t seed) {
  auto header = csv::base_header();
  header.insert(header.end(), {"test_mse_std", "ev_pct_std", "replicates"});
  csv::Writer writer(out, header);
  for (const ex::MethodPoint& p : points) {
    auto fields = base_fields(p.method, ex::median(p.lambda), p.T, n, d, seed, ex::mean(p.test_mse),
                              ex::mean(p.ev_pct), ex::mean(p.wall_ms));
    fields.push_back(csv::real(ex::stddev(p.test_mse)));
    fields.push_back(csv::real(ex::stddev(p.ev_pct)));
    fields.push_back(csv::integer(static_cast<std::int64_t>(p.test_mse.size())));
    writer.row(fields);
  }
}

int run_synth(const Options& opt) {
  ex::SyntheticConfig config;
  config.d = opt.dim;
  config.seed = opt.seed;
  config.test_tasks = opt.test_tasks;
  config.grid = parse_grid(opt.lambda_grid);
  OutputSink sink(opt.output);

  if (opt.mode == "trajectory") {
    if (opt.tasks.size() > 1 || opt.samples.size() > 1) {
      throw UsageError("trajectory mode takes a single --tasks and --samples value");
    }
    config.tasks = opt.tasks.empty() ? 50 : opt.tasks.front();
    config.n = opt.samples.empty() ? 25 : opt.samples.front();
    config.replicates = opt.replicates > 0 ? opt.replicates : 1;
    ex::TrajectoryOptions options;
    options.stride = opt.stride;
    options.record_time = opt.record_time;
    write_points(sink.stream(), ex::synthetic_trajectory(config, options), config.n, config.d, config.seed);
    return 0;
  }

  const std::vector<std::int64_t> tasks = opt.tasks.empty() ? std::vector<std::int64_t>{10, 50, 100, 150} : opt.tasks;
  const std::vector<std::int64_t> samples =
      opt.samples.empty() ? std::vector<std::int64_t>{10, 50, 100, 150} : opt.samples;
  config.replicates = opt.replicates > 0 ? opt.replicates : 5;
  auto header = csv::base_header();
  header.insert(header.end(), {"itl_mse", "improvement_pct", "improvement_pct_std", "replicates"});
  csv::Writer writer(sink.stream(), header);
  for (const ex::GridCell& cell : ex::synthetic_grid(config, tasks, samples)) {
    auto fields = base_fields(Method::OnlineLtl, ex::median(cell.online_lambda), cell.T, cell.n, config.d,
                              config.seed, ex::mean(cell.online_mse), ex::mean(cell.online_ev), 0.0);
    fields.push_back(csv::real(ex::mean(cell.itl_mse)));
    fields.push_back(csv::real(ex::mean(cell.improvement_pct)));
    fields.push_back(csv::real(ex::stddev(cell.improvement_pct)));
    fields.push_back(csv::integer(config.replicates));
    writer.row(fields);
  }
  return 0;
}

int run_schools(const Options& opt) {
  if (opt.schools.empty()) throw UsageError("schools requires --schools PATH");
  if (opt.tasks.size() > 1) throw UsageError("schools takes a single --tasks value");
  ex::SchoolsConfig config;
  config.path = opt.schools;
  config.split_seed = opt.split_seed;
  if (!opt.tasks.empty()) config.max_tasks = opt.tasks.front();
  config.grid = parse_grid(opt.lambda_grid);

  ex::TrajectoryOptions options;
  options.stride = opt.stride;
  options.record_time = opt.record_time;
  ex::SchoolsRun run;
  try {
    run = ex::schools_trajectory(config, options);
  } catch (const metalearn::Error& e) {
    if (e.code() == ErrorCode::FileNotFound) throw UsageError(e.what());
    throw;
  }

  double rows = 0.0;
  for (const TaskDataset& Z : run.data.train_tasks) rows += static_cast<double>(Z.n());
  const auto mean_n = static_cast<std::int64_t>(std::llround(rows / static_cast<double>(run.data.train_tasks.size())));
  OutputSink sink(opt.output);
  write_points(sink.stream(), run.points, mean_n, run.data.d, opt.split_seed);
  return 0;
}

int run_timing(const Options& opt) {
  ex::TimingConfig config;
  config.d = opt.dim;
  config.seed = opt.seed;
  config.test_tasks = opt.test_tasks;
  if (!opt.lambda_grid.empty()) {
    config.grid = parse_grid(opt.lambda_grid);
  } else if (!opt.lambdas.empty()) {
    std::vector<double> values = opt.lambdas;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    try {
      config.grid = LambdaGrid(values);
    } catch (const metalearn::Error& e) {
      throw UsageError(std::string("--lambda: ") + e.what());
    }
  }

  const std::vector<std::int64_t> tasks = opt.tasks.empty() ? std::vector<std::int64_t>{50, 100, 150} : opt.tasks;
  const std::vector<std::int64_t> samples = opt.samples.empty() ? std::vector<std::int64_t>{20, 50} : opt.samples;
  std::vector<std::pair<std::int64_t, std::int64_t>> cells;
  for (std::int64_t T : tasks) {
    for (std::int64_t n : samples) cells.emplace_back(T, n);
  }
  if (opt.cells > 0 && static_cast<std::size_t>(opt.cells) < cells.size()) cells.resize(static_cast<std::size_t>(opt.cells));

  OutputSink sink(opt.output);
  auto header = csv::base_header();
  header.push_back("iterations");
  csv::Writer writer(sink.stream(), header);
  const double lambda = config.grid.size() == 1 ? config.grid[0] : std::nan("");
  for (const auto& [T, n] : cells) {
    const ex::TimingRow row = ex::timing_cell(config, T, n);
    auto online = base_fields(Method::OnlineLtl, lambda, T, n, config.d, config.seed, row.online_mse, 0.0, row.online_ms);
    online.push_back(csv::integer(row.online_steps));
    writer.row(online);
    auto batch = base_fields(Method::BatchLtl, lambda, T, n, config.d, config.seed, row.batch_mse, 0.0, row.batch_ms);
    batch.push_back(csv::integer(row.batch_iterations));
    writer.row(batch);
  }
  return 0;
}

int run_check(const Options& opt) {
  static const std::set<std::string> kSuites = {"all", "gradient", "closed_form", "properties",
                                                "projection", "regret", "covariance"};
  if (!kSuites.count(opt.suite)) throw UsageError("unknown --suite '" + opt.suite + "'");
  auto wants = [&](const char* name) { return opt.suite == "all" || opt.suite == name; };
  auto trials = [&](int fallback) { return opt.trials > 0 ? opt.trials : fallback; };

  std::vector<checks::CheckResult> results;
  auto add = [&](std::vector<checks::CheckResult> more) {
    results.insert(results.end(), more.begin(), more.end());
  };
  if (wants("gradient")) results.push_back(checks::gradient_suite(trials(20), opt.seed + 1));
  if (wants("closed_form")) results.push_back(checks::closed_form_suite(trials(100), opt.seed + 2));
  if (wants("properties")) add(checks::properties_suite(trials(200), opt.seed + 3));
  if (wants("projection")) add(checks::projection_suite(trials(500), opt.seed + 4));
  if (wants("regret")) {
    const std::int64_t T = opt.tasks.empty() ? 200 : opt.tasks.front();
    const std::vector<double> lambdas = opt.lambdas.empty() ? std::vector<double>{0.1, 1.0} : opt.lambdas;
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < trials(3); ++k) seeds.push_back(opt.seed + static_cast<std::uint64_t>(k));
    add(checks::regret_suite(T, lambdas, seeds));
  }
  if (wants("covariance")) {
    results.push_back(checks::covariance_suite(opt.trials > 0 ? opt.trials : 100000, 50, opt.seed + 5));
  }

  bool all_passed = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    all_passed = all_passed && r.passed;
  }
  if (!opt.output.empty()) {
    OutputSink sink(opt.output);
    csv::Writer writer(sink.stream(), {"suite", "passed", "metric", "threshold"});
    for (const auto& r : results) {
      writer.row({r.name, r.passed ? "1" : "0", csv::real(r.metric), csv::real(r.threshold)});
    }
  }
  return all_passed ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> seen_warnings;
  metalearn::set_warning_handler([&seen_warnings](std::string_view message) {
    if (seen_warnings.emplace(message).second) std::cerr << "warning: " << message << '\n';
  });

  CLI::App app{"Online and batch learning-to-learn experiments"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "Random seed");
    cmd->add_option("--output", opt.output, "Write CSV here instead of stdout");
  };
  auto add_grid = [&opt](CLI::App* cmd) {
    cmd->add_option("--lambda-grid", opt.lambda_grid, "min,max,count (log-spaced); default 1e-6,1e3,30");
  };

  CLI::App* synth = app.add_subcommand("synth", "Synthetic shared-subspace experiments");
  add_common(synth);
  add_grid(synth);
  synth->add_option("--mode", opt.mode, "trajectory or grid")->check(CLI::IsMember({"trajectory", "grid"}));
  synth->add_option("--tasks", opt.tasks, "Training tasks (comma list in grid mode)")->delimiter(',');
  synth->add_option("--samples", opt.samples, "Samples per task (comma list in grid mode)")->delimiter(',');
  synth->add_option("--dim", opt.dim, "Input dimension (even)");
  synth->add_option("--replicates", opt.replicates, "Independent replicates per cell");
  synth->add_option("--test-tasks", opt.test_tasks, "Number of test tasks");
  synth->add_option("--stride", opt.stride, "Score every stride-th task (trajectory mode)");
  synth->add_flag("--record-time", opt.record_time, "Fill wall_ms with measured times");

  CLI::App* schools = app.add_subcommand("schools", "Schools exam-score experiment");
  schools->add_option("--schools", opt.schools, "CSV file: task_id,y,x1,...,x26");
  schools->add_option("--split-seed", opt.split_seed, "Seed of the task partition");
  schools->add_option("--tasks", opt.tasks, "Use at most this many training tasks")->delimiter(',');
  schools->add_option("--output", opt.output, "Write CSV here instead of stdout");
  schools->add_option("--stride", opt.stride, "Score every stride-th task");
  schools->add_flag("--record-time", opt.record_time, "Fill wall_ms with measured times");
  add_grid(schools);

  CLI::App* timing = app.add_subcommand("timing", "Wall time of online vs warm-restarted batch LTL");
  add_common(timing);
  add_grid(timing);
  timing->add_option("--tasks", opt.tasks, "Training task counts")->delimiter(',');
  timing->add_option("--samples", opt.samples, "Samples per task")->delimiter(',');
  timing->add_option("--dim", opt.dim, "Input dimension (even)");
  timing->add_option("--cells", opt.cells, "Run only the first k (T, n) cells");
  timing->add_option("--lambda", opt.lambdas, "Regularisation value(s); default 1")->delimiter(',');
  timing->add_option("--test-tasks", opt.test_tasks, "Number of test tasks");

  CLI::App* check = app.add_subcommand("check", "Run the numerical self-check suites");
  check->add_option("--suite", opt.suite,
                    "all, gradient, closed_form, properties, projection, regret, covariance");
  check->add_option("--trials", opt.trials, "Trials for the selected suite");
  check->add_option("--tasks", opt.tasks, "Stream length for the regret suite")->delimiter(',');
  check->add_option("--lambda", opt.lambdas, "Lambda value(s) for the regret suite")->delimiter(',');
  add_common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return run_synth(opt);
    if (*schools) return run_schools(opt);
    if (*timing) return run_timing(opt);
    if (*check) return run_check(opt);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const metalearn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidParameter || e.code() == ErrorCode::InvalidSpec ? kExitUsage
                                                                                         : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
