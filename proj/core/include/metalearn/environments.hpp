#pragma once

// Task sources: the synthetic shared-subspace environment and the Schools
// exam-score dataset.

#include "metalearn/types.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

namespace metalearn {

using Rng = std::mt19937_64;

/// Independent generator for (seed, purpose, index). Every task index gets its
/// own child stream, so adding or removing tasks never perturbs the others.
Rng child_rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index);

enum class StreamPurpose : std::uint64_t {
  Basis = 0,
  Train = 1,
  Validation = 2,
  Test = 3,
  Partition = 4,
  RowSplit = 5,
};

Rng child_rng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index);

/// Synthetic environment: task vectors w = P w~ with w~ uniform on the unit
/// sphere of R^k, inputs uniform on the unit sphere of R^d, y = <w, x> + eps.
struct EnvironmentSpec {
  Eigen::Index d = 50;
  Eigen::Index subspace_dim = 25;
  double noise_std = 0.0;
  Eigen::Index n = 25;
  std::uint64_t seed = 0;
  Matrix basis;  // d x k, orthonormal columns

  /// Builds P from the seed's Basis stream. d must be even; k = d / 2.
  static EnvironmentSpec make(Eigen::Index d, Eigen::Index n, double noise_std, std::uint64_t seed);
};

/// d = 50, k = 25, noise variance 0.2, n = 25 unless overridden.
EnvironmentSpec default_synthetic(Eigen::Index n = 25, std::uint64_t seed = 0);

struct SampledTask {
  Vector weights;
  TaskSplit split;
};

/// Draws one task and independent train/test samples of size spec.n each.
SampledTask sample_task(const EnvironmentSpec& spec, Rng& rng);

/// Task `index` of the given purpose, drawn from its own child stream.
SampledTask sample_task(const EnvironmentSpec& spec, StreamPurpose purpose, std::uint64_t index);

std::vector<SampledTask> sample_tasks(const EnvironmentSpec& spec, StreamPurpose purpose,
                                      std::size_t count);

/// A point drawn uniformly from the unit sphere in R^d.
Vector sample_unit_sphere(Eigen::Index d, Rng& rng);

struct SchoolsData {
  std::vector<TaskDataset> train_tasks;  // full samples, fed to the LTL learners
  std::vector<TaskSplit> validation_tasks;
  std::vector<TaskSplit> test_tasks;
  Eigen::Index d = 0;
  std::size_t task_count = 0;
  double input_scale = 1.0;  // inputs were divided by this
  double output_min = 0.0;   // outputs were mapped by (y - min) / (max - min)
  double output_max = 1.0;
};

/// Reads `task_id,y,x1,...,xd` rows, groups them by task id (first-appearance
/// order), normalises inputs by the largest input norm, min-max scales
/// outputs with LTL-training-task statistics, and partitions tasks 25% / 50% /
/// 25% into train / validation / test under `split_seed`. Validation and test
/// tasks are split into per-task train and test halves.
SchoolsData load_schools(const std::filesystem::path& path, std::uint64_t split_seed);

/// One group of rows of a Schools-format file.
struct RawTask {
  std::string id;
  Matrix inputs;
  Vector outputs;
};

/// Writes tasks in the format load_schools reads.
void write_schools_csv(const std::filesystem::path& path, const std::vector<RawTask>& tasks);

}  // namespace metalearn
