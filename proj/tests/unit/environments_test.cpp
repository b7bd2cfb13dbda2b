#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unistd.h>

#include "metalearn/environments.hpp"
#include "metalearn/errors.hpp"

namespace metalearn {
namespace {

namespace fs = std::filesystem;

TEST(Environment, DefaultSynthetic) {
  const EnvironmentSpec spec = default_synthetic();
  EXPECT_EQ(spec.d, 50);
  EXPECT_EQ(spec.subspace_dim, 25);
  EXPECT_EQ(spec.n, 25);
  EXPECT_NEAR(spec.noise_std * spec.noise_std, 0.2, 1e-15);
  EXPECT_LE((spec.basis.transpose() * spec.basis - Matrix::Identity(25, 25)).norm(), 1e-12);
}

TEST(Environment, InvalidSpecs) {
  EXPECT_THROW(EnvironmentSpec::make(7, 10, 0.1, 0), Error);
  EXPECT_THROW(EnvironmentSpec::make(8, 0, 0.1, 0), Error);
  EXPECT_THROW(EnvironmentSpec::make(8, 10, -1.0, 0), Error);
}

TEST(SampleTask, UnitNormsAndNoiselessBound) {
  const EnvironmentSpec spec = EnvironmentSpec::make(20, 15, 0.0, 3);
  for (std::uint64_t t = 0; t < 20; ++t) {
    const SampledTask task = sample_task(spec, StreamPurpose::Train, t);
    EXPECT_NEAR(task.weights.norm(), 1.0, 1e-12);
    const Vector projected = spec.basis * (spec.basis.transpose() * task.weights);
    EXPECT_LE((projected - task.weights).norm(), 1e-12);
    for (const TaskDataset* Z : {&task.split.train, &task.split.test}) {
      EXPECT_EQ(Z->n(), 15);
      for (Eigen::Index i = 0; i < Z->n(); ++i) {
        EXPECT_NEAR(Z->inputs().row(i).norm(), 1.0, 1e-12);
        EXPECT_NEAR(Z->outputs()(i), Z->inputs().row(i).dot(task.weights), 1e-15);
        EXPECT_LE(std::abs(Z->outputs()(i)), 1.0 + 1e-12);
      }
    }
  }
}

TEST(SampleTask, DeterministicPerPurposeAndIndex) {
  const EnvironmentSpec spec = EnvironmentSpec::make(10, 5, 0.3, 4);
  const SampledTask a = sample_task(spec, StreamPurpose::Test, 7);
  const SampledTask b = sample_task(spec, StreamPurpose::Test, 7);
  const SampledTask c = sample_task(spec, StreamPurpose::Train, 7);
  EXPECT_EQ(a.split.train.outputs(), b.split.train.outputs());
  EXPECT_NE(a.weights, c.weights);
  const auto batch = sample_tasks(spec, StreamPurpose::Test, 8);
  EXPECT_EQ(batch[7].split.test.inputs(), a.split.test.inputs());
}

TEST(SampleTask, NoiseVarianceMatches) {
  const EnvironmentSpec spec = EnvironmentSpec::make(10, 200, std::sqrt(0.2), 5);
  double sum = 0.0;
  double count = 0.0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const SampledTask task = sample_task(spec, StreamPurpose::Train, t);
    const Vector residual = task.split.train.outputs() - task.split.train.inputs() * task.weights;
    sum += residual.squaredNorm();
    count += static_cast<double>(residual.size());
  }
  EXPECT_NEAR(sum / count, 0.2, 0.01);
}

TEST(SampleTask, WeightSecondMomentConcentratesOnSubspace) {
  const EnvironmentSpec spec = default_synthetic(1, 6);
  Rng rng = child_rng(6, 9, 0);
  Matrix second = Matrix::Zero(50, 50);
  const int count = 10000;
  for (int t = 0; t < count; ++t) {
    const Vector w = sample_task(spec, rng).weights;
    second.noalias() += w * w.transpose();
  }
  second /= count;
  const Matrix target = spec.basis * spec.basis.transpose() / 25.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(second - target, Eigen::EigenvaluesOnly);
  EXPECT_LE(eig.eigenvalues().cwiseAbs().maxCoeff(), 0.05);
}

TEST(SampleUnitSphere, UnitNorm) {
  Rng rng = child_rng(7, 0, 0);
  for (int k = 0; k < 100; ++k) EXPECT_NEAR(sample_unit_sphere(13, rng).norm(), 1.0, 1e-12);
}

TEST(ChildRng, StreamsAreIndependentOfCallOrder) {
  Rng a = child_rng(1, StreamPurpose::Train, 3);
  Rng unrelated = child_rng(1, StreamPurpose::Test, 3);
  unrelated();
  Rng b = child_rng(1, StreamPurpose::Train, 3);
  EXPECT_EQ(a(), b());
  EXPECT_NE(child_rng(1, StreamPurpose::Train, 3)(), child_rng(1, StreamPurpose::Train, 4)());
}

class SchoolsFile : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("metalearn-schools-" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_fixture(int task_count, Eigen::Index d = 26) {
    Rng rng = child_rng(99, 0, 0);
    std::normal_distribution<double> gauss;
    std::vector<RawTask> tasks;
    for (int t = 0; t < task_count; ++t) {
      const Eigen::Index rows = 4 + t % 7;
      RawTask task{"s" + std::to_string(t), Matrix(rows, d), Vector(rows)};
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) task.inputs(i, j) = gauss(rng) * 3.0;
        task.outputs(i) = 40.0 + 10.0 * gauss(rng);
      }
      tasks.push_back(std::move(task));
    }
    const fs::path path = dir_ / "schools.csv";
    write_schools_csv(path, tasks);
    return path;
  }

  fs::path write_text(const std::string& text) {
    const fs::path path = dir_ / "custom.csv";
    std::ofstream(path) << text;
    return path;
  }

  static ErrorCode load_error(const fs::path& path) {
    try {
      load_schools(path, 0);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidParameter;
  }

  fs::path dir_;
};

TEST_F(SchoolsFile, PartitionSizesAndScaling) {
  const SchoolsData data = load_schools(write_fixture(139), 1);
  EXPECT_EQ(data.task_count, 139u);
  EXPECT_EQ(data.d, 26);
  EXPECT_EQ(data.train_tasks.size(), 34u);
  EXPECT_EQ(data.validation_tasks.size(), 69u);
  EXPECT_EQ(data.test_tasks.size(), 36u);
  double max_norm = 0.0;
  auto track = [&](const TaskDataset& Z) {
    for (Eigen::Index i = 0; i < Z.n(); ++i) max_norm = std::max(max_norm, Z.inputs().row(i).norm());
  };
  for (const TaskDataset& Z : data.train_tasks) {
    track(Z);
    EXPECT_GE(Z.outputs().minCoeff(), 0.0);
    EXPECT_LE(Z.outputs().maxCoeff(), 1.0);
  }
  for (const auto* group : {&data.validation_tasks, &data.test_tasks}) {
    for (const TaskSplit& s : *group) {
      track(s.train);
      track(s.test);
      EXPECT_EQ(s.train.n(), (s.train.n() + s.test.n() + 1) / 2);
    }
  }
  EXPECT_LE(max_norm, 1.0 + 1e-12);
  EXPECT_NEAR(max_norm, 1.0, 1e-12);
}

TEST_F(SchoolsFile, SplitSeedControlsPartition) {
  const fs::path path = write_fixture(40);
  const SchoolsData a = load_schools(path, 1);
  const SchoolsData b = load_schools(path, 1);
  const SchoolsData c = load_schools(path, 2);
  ASSERT_EQ(a.train_tasks.size(), 10u);
  for (std::size_t i = 0; i < a.train_tasks.size(); ++i) {
    EXPECT_EQ(a.train_tasks[i].outputs(), b.train_tasks[i].outputs());
  }
  bool differs = false;
  for (std::size_t i = 0; i < a.train_tasks.size(); ++i) {
    differs = differs || a.train_tasks[i].outputs().size() != c.train_tasks[i].outputs().size() ||
              a.train_tasks[i].outputs() != c.train_tasks[i].outputs();
  }
  EXPECT_TRUE(differs);
}

TEST_F(SchoolsFile, Errors) {
  EXPECT_EQ(load_error(dir_ / "missing.csv"), ErrorCode::FileNotFound);
  EXPECT_EQ(load_error(write_text("")), ErrorCode::SchemaError);
  EXPECT_EQ(load_error(write_text("id,y,x1\n")), ErrorCode::SchemaError);
  EXPECT_EQ(load_error(write_text("task_id,y,x1,x2\na,1,2\n")), ErrorCode::SchemaError);
  EXPECT_EQ(load_error(write_text("task_id,y,x1,x2\na,1,2,zz\n")), ErrorCode::SchemaError);
  EXPECT_EQ(load_error(write_text("task_id,y,x1\na,1,2\na,2,3\nb,1,1\nb,0,1\n")), ErrorCode::TaskCountMismatch);
}

TEST_F(SchoolsFile, SchemaErrorNamesTheLine) {
  try {
    load_schools(write_text("task_id,y,x1,x2\na,1,2,3\nb,1,2\n"), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST_F(SchoolsFile, UnexpectedTaskCountWarns) {
  std::vector<std::string> warnings;
  WarningHandler previous = set_warning_handler([&](std::string_view m) { warnings.emplace_back(m); });
  load_schools(write_fixture(20), 0);
  set_warning_handler(previous);
  EXPECT_FALSE(warnings.empty());
}

}  // namespace
}  // namespace metalearn
