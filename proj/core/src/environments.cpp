#include "metalearn/environments.hpp"

#include "metalearn/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>

namespace metalearn {

Rng child_rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(purpose), hi(purpose), lo(index), hi(index)};
  return Rng(seq);
}

Rng child_rng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
  return child_rng(seed, static_cast<std::uint64_t>(purpose), index);
}

Vector sample_unit_sphere(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(d);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < d; ++i) x[i] = normal(rng);
    norm = x.norm();
  } while (norm == 0.0);
  return x / norm;
}

EnvironmentSpec EnvironmentSpec::make(Eigen::Index d, Eigen::Index n, double noise_std,
                                      std::uint64_t seed) {
  if (d < 2 || d % 2 != 0) fail(ErrorCode::InvalidSpec, "d must be even and >= 2");
  if (n < 1) fail(ErrorCode::InvalidSpec, "n must be >= 1");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    fail(ErrorCode::InvalidSpec, "noise standard deviation must be finite and >= 0");
  }
  EnvironmentSpec spec;
  spec.d = d;
  spec.subspace_dim = d / 2;
  spec.noise_std = noise_std;
  spec.n = n;
  spec.seed = seed;

  Rng rng = child_rng(seed, StreamPurpose::Basis, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix gaussian(d, spec.subspace_dim);
  for (Eigen::Index j = 0; j < gaussian.cols(); ++j) {
    for (Eigen::Index i = 0; i < gaussian.rows(); ++i) gaussian(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  spec.basis = qr.householderQ() * Matrix::Identity(d, spec.subspace_dim);
  return spec;
}

EnvironmentSpec default_synthetic(Eigen::Index n, std::uint64_t seed) {
  return EnvironmentSpec::make(50, n, std::sqrt(0.2), seed);
}

namespace {

void check_spec(const EnvironmentSpec& spec) {
  if (spec.d < 2 || spec.d % 2 != 0 || spec.subspace_dim != spec.d / 2 || spec.n < 1 ||
      spec.basis.rows() != spec.d || spec.basis.cols() != spec.subspace_dim ||
      !(spec.noise_std >= 0.0)) {
    fail(ErrorCode::InvalidSpec, "environment spec is inconsistent; build it with EnvironmentSpec::make");
  }
}

TaskDataset sample_dataset(const EnvironmentSpec& spec, const Vector& w, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix X(spec.n, spec.d);
  Vector y(spec.n);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    X.row(i) = sample_unit_sphere(spec.d, rng).transpose();
    y[i] = X.row(i).dot(w) + spec.noise_std * noise(rng);
  }
  return validate_dataset(std::move(X), std::move(y), false);
}

}  // namespace

SampledTask sample_task(const EnvironmentSpec& spec, Rng& rng) {
  check_spec(spec);
  const Vector coefficients = sample_unit_sphere(spec.subspace_dim, rng);
  Vector w = spec.basis * coefficients;
  TaskDataset train = sample_dataset(spec, w, rng);
  TaskDataset test = sample_dataset(spec, w, rng);
  return SampledTask{std::move(w), TaskSplit{std::move(train), std::move(test)}};
}

SampledTask sample_task(const EnvironmentSpec& spec, StreamPurpose purpose, std::uint64_t index) {
  Rng rng = child_rng(spec.seed, purpose, index);
  return sample_task(spec, rng);
}

std::vector<SampledTask> sample_tasks(const EnvironmentSpec& spec, StreamPurpose purpose,
                                      std::size_t count) {
  std::vector<SampledTask> tasks;
  tasks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) tasks.push_back(sample_task(spec, purpose, i));
  return tasks;
}

// --- Schools ---------------------------------------------------------------

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string location(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

double parse_cell(std::string_view cell, const std::filesystem::path& path, std::size_t line,
                  std::size_t column) {
  cell = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    std::ostringstream os;
    os << location(path, line) << ": column " << column + 1 << " is not a finite number ('"
       << cell << "')";
    fail(ErrorCode::SchemaError, os.str());
  }
  return value;
}

struct TaskRows {
  std::string id;
  std::vector<std::vector<double>> inputs;
  std::vector<double> outputs;
};

TaskDataset make_dataset(const Matrix& X, const Vector& y) { return validate_dataset(X, y, false); }

}  // namespace

SchoolsData load_schools(const std::filesystem::path& path, std::uint64_t split_seed) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open Schools file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::SchemaError, location(path, 1) + ": missing header");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_fields(line);
  if (header.size() < 3 || trim(header[0]) != "task_id" || trim(header[1]) != "y") {
    fail(ErrorCode::SchemaError, location(path, 1) + ": header must be task_id,y,x1,...,xd");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (trim(header[j + 2]) != "x" + std::to_string(j + 1)) {
      fail(ErrorCode::SchemaError,
           location(path, 1) + ": expected column x" + std::to_string(j + 1));
    }
  }
  if (d != 26) {
    warn("Schools file " + path.string() + " has d = " + std::to_string(d) + " features (expected 26)");
  }

  std::vector<TaskRows> tasks;
  std::map<std::string, std::size_t, std::less<>> index_of;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << location(path, line_no) << ": expected " << header.size() << " columns, found "
         << fields.size();
      fail(ErrorCode::SchemaError, os.str());
    }
    const std::string id(trim(fields[0]));
    if (id.empty()) fail(ErrorCode::SchemaError, location(path, line_no) + ": empty task_id");
    auto it = index_of.find(id);
    if (it == index_of.end()) {
      it = index_of.emplace(id, tasks.size()).first;
      tasks.push_back(TaskRows{id, {}, {}});
    }
    TaskRows& task = tasks[it->second];
    task.outputs.push_back(parse_cell(fields[1], path, line_no, 1));
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = parse_cell(fields[j + 2], path, line_no, j + 2);
    task.inputs.push_back(std::move(x));
  }

  if (tasks.size() < 3) {
    fail(ErrorCode::TaskCountMismatch,
         path.string() + ": found " + std::to_string(tasks.size()) + " tasks, need at least 3");
  }
  if (tasks.size() != 139) {
    warn("Schools file " + path.string() + " has " + std::to_string(tasks.size()) +
         " tasks (expected 139)");
  }

  SchoolsData data;
  data.d = static_cast<Eigen::Index>(d);
  data.task_count = tasks.size();

  std::vector<Matrix> inputs;
  std::vector<Vector> outputs;
  double max_norm = 0.0;
  for (const TaskRows& task : tasks) {
    Matrix X(static_cast<Eigen::Index>(task.inputs.size()), data.d);
    for (std::size_t i = 0; i < task.inputs.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = task.inputs[i][j];
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) max_norm = std::max(max_norm, X.row(i).norm());
    inputs.push_back(std::move(X));
    outputs.push_back(Eigen::Map<const Vector>(task.outputs.data(), static_cast<Eigen::Index>(task.outputs.size())));
  }
  data.input_scale = max_norm > 0.0 ? max_norm : 1.0;
  for (Matrix& X : inputs) X /= data.input_scale;

  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng partition_rng = child_rng(split_seed, StreamPurpose::Partition, 0);
  std::shuffle(order.begin(), order.end(), partition_rng);
  const std::size_t n_train = tasks.size() / 4;
  const std::size_t n_validation = tasks.size() / 2;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n_train; ++k) {
    lo = std::min(lo, outputs[order[k]].minCoeff());
    hi = std::max(hi, outputs[order[k]].maxCoeff());
  }
  data.output_min = lo;
  data.output_max = hi > lo ? hi : lo + 1.0;
  const double range = data.output_max - data.output_min;
  for (Vector& y : outputs) y = (y.array() - data.output_min) / range;

  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t t = order[k];
    if (k < n_train) {
      data.train_tasks.push_back(make_dataset(inputs[t], outputs[t]));
      continue;
    }
    const Eigen::Index n = inputs[t].rows();
    if (n < 2) {
      warn("Schools task '" + tasks[t].id + "' has fewer than 2 rows; skipped for evaluation");
      continue;
    }
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    Rng row_rng = child_rng(split_seed, StreamPurpose::RowSplit, t);
    std::shuffle(rows.begin(), rows.end(), row_rng);
    const Eigen::Index n_fit = (n + 1) / 2;
    std::vector<Eigen::Index> fit_rows(rows.begin(), rows.begin() + n_fit);
    std::vector<Eigen::Index> eval_rows(rows.begin() + n_fit, rows.end());
    TaskSplit split{make_dataset(inputs[t](fit_rows, Eigen::all), outputs[t](fit_rows)),
                    make_dataset(inputs[t](eval_rows, Eigen::all), outputs[t](eval_rows))};
    if (k < n_train + n_validation) {
      data.validation_tasks.push_back(std::move(split));
    } else {
      data.test_tasks.push_back(std::move(split));
    }
  }
  return data;
}

void write_schools_csv(const std::filesystem::path& path, const std::vector<RawTask>& tasks) {
  if (tasks.empty()) fail(ErrorCode::EmptyInput, "no tasks to write");
  const Eigen::Index d = tasks.front().inputs.cols();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::FileNotFound, "cannot write '" + path.string() + "'");
  out << "task_id,y";
  for (Eigen::Index j = 0; j < d; ++j) out << ",x" << j + 1;
  out << '\n';
  out << std::setprecision(17);
  for (const RawTask& task : tasks) {
    if (task.inputs.cols() != d || task.inputs.rows() != task.outputs.size()) {
      fail(ErrorCode::DimensionMismatch, "task '" + task.id + "' has inconsistent shape");
    }
    for (Eigen::Index i = 0; i < task.inputs.rows(); ++i) {
      out << task.id << ',' << task.outputs[i];
      for (Eigen::Index j = 0; j < d; ++j) out << ',' << task.inputs(i, j);
      out << '\n';
    }
  }
}

}  // namespace metalearn
