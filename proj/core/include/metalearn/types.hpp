#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace metalearn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numerical slack for the constraint set {D PSD, tr(D) <= 1/lambda}.
/// Both are applied relative to max(1, 1/lambda): eigen-rebuilds of a matrix
/// whose trace is 1e6 cannot be trusted below ~1e-10 absolute.
inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kNormSlack = 1e-12;  // rounding allowance on ||x|| <= 1

/// (M + M^T) / 2.
Matrix symmetrize(const Matrix& m);

/// One task's sample: n points x_i in R^d (rows of `inputs`) with outputs y_i.
class TaskDataset {
 public:
  const Matrix& inputs() const noexcept { return inputs_; }
  const Vector& outputs() const noexcept { return outputs_; }
  Eigen::Index n() const noexcept { return inputs_.rows(); }
  Eigen::Index d() const noexcept { return inputs_.cols(); }

  /// True when every ||x_i|| <= 1 and every y_i lies in [0, 1]. Computed for
  /// every dataset, whether or not the strict check was requested.
  bool theory_compliant() const noexcept { return compliant_; }

 private:
  friend TaskDataset validate_dataset(Matrix, Vector, bool);
  TaskDataset(Matrix inputs, Vector outputs, bool compliant)
      : inputs_(std::move(inputs)), outputs_(std::move(outputs)), compliant_(compliant) {}

  Matrix inputs_;
  Vector outputs_;
  bool compliant_;
};

/// Builds a dataset, rejecting shape errors and non-finite cells. With
/// `theory_compliant` set, rows outside the unit ball or outputs outside [0,1]
/// raise TheoryViolation instead of being clipped.
TaskDataset validate_dataset(Matrix raw_inputs, Vector raw_outputs, bool theory_compliant);

/// A task seen through a training sample Z and an independent test sample Z'
/// drawn from the same distribution.
struct TaskSplit {
  TaskDataset train;
  TaskDataset test;
};

/// A point of the constraint set: symmetric PSD d x d matrix with trace at
/// most 1/lambda.
class Representation {
 public:
  /// Checks symmetry (exact), PSD and trace at the module tolerances.
  static Representation make(Matrix matrix, double lambda);

  /// Skips the eigenvalue check. Callers must already know the matrix is
  /// feasible (projection output, convex combinations of feasible points).
  static Representation assume_valid(Matrix matrix, double lambda);

  /// I / (lambda * d): isotropic, trace exactly 1/lambda.
  static Representation isotropic(Eigen::Index d, double lambda);

  const Matrix& matrix() const noexcept { return matrix_; }
  double lambda() const noexcept { return lambda_; }
  double budget() const noexcept { return 1.0 / lambda_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }

 private:
  Representation(Matrix matrix, double lambda) : matrix_(std::move(matrix)), lambda_(lambda) {}

  Matrix matrix_;
  double lambda_;
};

/// Scale used for the relative PSD/trace slack at a given lambda.
double feasibility_scale(double lambda);

/// Returns an explanation when `matrix` is outside the constraint set for
/// `lambda`, std::nullopt when it is feasible at the module tolerances.
std::optional<std::string> feasibility_violation(const Matrix& matrix, double lambda);

struct LinearPredictor {
  Vector weights;

  double predict(const Eigen::Ref<const Vector>& x) const { return weights.dot(x); }
};

enum class Method { OnlineLtl, BatchLtl, Itl, Mtl };

std::string_view to_string(Method method);

/// One result row of an experiment.
struct ExperimentRecord {
  Method method = Method::OnlineLtl;
  double lambda = 0.0;
  std::int64_t T = 0;
  std::int64_t n = 0;
  std::int64_t d = 0;
  std::uint64_t seed = 0;
  double test_mse = 0.0;
  double explained_variance_pct = 0.0;
  double wall_ms = 0.0;
};

}  // namespace metalearn
