#include "metalearn/ridge_loss.hpp"

#include "metalearn/errors.hpp"

#include <sstream>

namespace metalearn {

namespace {

void check_dims(const Representation& D, const TaskDataset& Z) {
  if (D.dim() != Z.d()) {
    std::ostringstream os;
    os << "representation is " << D.dim() << "x" << D.dim() << " but dataset has d = " << Z.d();
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

std::shared_ptr<const RidgeSystem> factorize(const Representation& D, const TaskDataset& Z) {
  check_dims(D, Z);
  const Matrix& X = Z.inputs();
  const auto n = static_cast<double>(Z.n());

  Matrix M = X * D.matrix() * X.transpose();
  M.diagonal().array() += n;

  auto system = std::make_shared<RidgeSystem>();
  system->factor.compute(M);
  if (system->factor.info() != Eigen::Success) {
    fail(ErrorCode::LinearSolveFailure, "Cholesky factorisation of X D X^T + nI failed");
  }
  system->solved_outputs = system->factor.solve(Z.outputs());
  if (!system->solved_outputs.allFinite()) {
    fail(ErrorCode::LinearSolveFailure, "non-finite solution of the ridge system");
  }
  return system;
}

}  // namespace

LinearPredictor ridge_solve(const Representation& D, const TaskDataset& Z) {
  const auto system = factorize(D, Z);
  Vector w = D.matrix() * (Z.inputs().transpose() * system->solved_outputs);
  return LinearPredictor{std::move(w)};
}

LossEval meta_loss(const Representation& D, const TaskDataset& Z) {
  LossEval eval;
  eval.solver_cache = factorize(D, Z);
  eval.value = static_cast<double>(Z.n()) * eval.solver_cache->solved_outputs.squaredNorm();
  return eval;
}

Matrix meta_gradient(const LossEval& eval, const TaskDataset& Z) {
  if (!eval.solver_cache) fail(ErrorCode::PreconditionViolated, "loss evaluation has no cache");
  const RidgeSystem& system = *eval.solver_cache;
  if (system.solved_outputs.size() != Z.n()) {
    fail(ErrorCode::DimensionMismatch, "cached system does not match dataset");
  }
  const Vector b = system.factor.solve(system.solved_outputs);
  const Vector u = Z.inputs().transpose() * system.solved_outputs;
  const Vector v = Z.inputs().transpose() * b;
  const auto n = static_cast<double>(Z.n());
  // u v^T + v u^T is symmetric entry by entry, no re-symmetrisation needed.
  return -n * (u * v.transpose() + v * u.transpose());
}

Matrix meta_gradient(const Representation& D, const TaskDataset& Z) {
  return meta_gradient(meta_loss(D, Z), Z);
}

double empirical_risk(const LinearPredictor& w, const TaskDataset& Z) {
  if (w.weights.size() != Z.d()) {
    std::ostringstream os;
    os << "predictor has " << w.weights.size() << " weights but dataset has d = " << Z.d();
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  return (Z.inputs() * w.weights - Z.outputs()).squaredNorm() / static_cast<double>(Z.n());
}

double range_residual(const Representation& D, const Vector& w, double eig_floor) {
  if (w.size() != D.dim()) fail(ErrorCode::DimensionMismatch, "predictor and representation sizes differ");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(D.matrix());
  if (eig.info() != Eigen::Success) fail(ErrorCode::EigenFailure, "eigendecomposition failed");
  Vector in_range = Vector::Zero(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (eig.eigenvalues()[i] > eig_floor) {
      const auto u = eig.eigenvectors().col(i);
      in_range += u.dot(w) * u;
    }
  }
  return (w - in_range).norm();
}

}  // namespace metalearn
