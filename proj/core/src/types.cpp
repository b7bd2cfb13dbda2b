#include "metalearn/types.hpp"

#include "metalearn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace metalearn {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

TaskDataset validate_dataset(Matrix raw_inputs, Vector raw_outputs, bool theory_compliant) {
  if (raw_inputs.rows() < 1 || raw_inputs.cols() < 1) {
    fail(ErrorCode::DimensionMismatch, "dataset needs n >= 1 rows and d >= 1 columns");
  }
  if (raw_outputs.size() != raw_inputs.rows()) {
    std::ostringstream os;
    os << "inputs have " << raw_inputs.rows() << " rows but outputs have " << raw_outputs.size()
       << " entries";
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  if (!raw_inputs.allFinite() || !raw_outputs.allFinite()) {
    fail(ErrorCode::NonFiniteInput, "dataset contains non-finite values");
  }

  bool compliant = true;
  for (Eigen::Index i = 0; i < raw_inputs.rows(); ++i) {
    const double norm = raw_inputs.row(i).norm();
    const double y = raw_outputs[i];
    if (norm > 1.0 + kNormSlack || y < 0.0 || y > 1.0) {
      compliant = false;
      if (theory_compliant) {
        std::ostringstream os;
        os << "row " << i << " has ||x|| = " << norm << ", y = " << y
           << " (requires ||x|| <= 1 and y in [0,1])";
        fail(ErrorCode::TheoryViolation, os.str());
      }
    }
  }
  return TaskDataset(std::move(raw_inputs), std::move(raw_outputs), compliant);
}

double feasibility_scale(double lambda) { return std::max(1.0, 1.0 / lambda); }

std::optional<std::string> feasibility_violation(const Matrix& matrix, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) return "lambda must be positive and finite";
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) return "matrix must be square, d >= 1";
  if (!matrix.allFinite()) return "matrix has non-finite entries";
  if ((matrix - matrix.transpose()).norm() != 0.0) return "matrix is not symmetric";

  const double scale = feasibility_scale(lambda);
  const double trace = matrix.trace();
  if (trace > 1.0 / lambda + kTraceTolerance * scale) {
    std::ostringstream os;
    os << "trace " << trace << " exceeds budget 1/lambda = " << 1.0 / lambda;
    return os.str();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return "eigenvalue computation failed";
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -kPsdTolerance * scale) {
    std::ostringstream os;
    os << "smallest eigenvalue " << min_eig << " is negative";
    return os.str();
  }
  return std::nullopt;
}

Representation Representation::make(Matrix matrix, double lambda) {
  if (auto why = feasibility_violation(matrix, lambda)) {
    fail(lambda > 0.0 ? ErrorCode::InvalidRepresentation : ErrorCode::InvalidParameter, *why);
  }
  return Representation(std::move(matrix), lambda);
}

Representation Representation::assume_valid(Matrix matrix, double lambda) {
  return Representation(std::move(matrix), lambda);
}

Representation Representation::isotropic(Eigen::Index d, double lambda) {
  if (d < 1) fail(ErrorCode::InvalidParameter, "dimension must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorCode::InvalidParameter, "lambda must be positive and finite");
  }
  Matrix m = Matrix::Identity(d, d) / (lambda * static_cast<double>(d));
  return Representation(std::move(m), lambda);
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::OnlineLtl: return "online_ltl";
    case Method::BatchLtl: return "batch_ltl";
    case Method::Itl: return "itl";
    case Method::Mtl: return "mtl";
  }
  return "unknown";
}

}  // namespace metalearn
