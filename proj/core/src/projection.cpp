#include "metalearn/projection.hpp"

#include "metalearn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

namespace metalearn {

double threshold_root(std::span<const double> eigs, double budget) {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    fail(ErrorCode::InvalidParameter, "budget must be positive and finite");
  }
  std::vector<double> sorted(eigs.begin(), eigs.end());
  for (double g : sorted) {
    if (!std::isfinite(g)) fail(ErrorCode::NonFiniteInput, "non-finite eigenvalue");
  }
  double clipped = 0.0;
  for (double g : sorted) clipped += std::max(0.0, g);
  if (clipped <= budget) {
    std::ostringstream os;
    os << "clipped eigenvalue sum " << clipped << " already fits budget " << budget;
    fail(ErrorCode::PreconditionViolated, os.str());
  }

  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // The active set is a prefix of the sorted eigenvalues; the largest k with
  // sorted[k-1] > (prefix_k - budget) / k determines a.
  double prefix = 0.0;
  double best_prefix = 0.0;
  std::size_t active = 0;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    prefix += sorted[k - 1];
    const double candidate = (prefix - budget) / static_cast<double>(k);
    if (sorted[k - 1] > candidate) {
      active = k;
      best_prefix = prefix;
    }
  }
  return std::max(0.0, (best_prefix - budget) / static_cast<double>(active));
}

Representation project(const Matrix& Q, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorCode::InvalidParameter, "lambda must be positive and finite");
  }
  if (Q.rows() != Q.cols() || Q.rows() < 1) {
    fail(ErrorCode::DimensionMismatch, "projection input must be square");
  }
  if (!Q.allFinite()) fail(ErrorCode::NonFiniteInput, "projection input has non-finite entries");

  const Matrix sym = symmetrize(Q);
  const double budget = 1.0 / lambda;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    fail(ErrorCode::EigenFailure, "symmetric eigendecomposition did not converge");
  }
  const Vector& gamma = eig.eigenvalues();

  if (gamma.minCoeff() >= 0.0 && sym.trace() <= budget) {
    return Representation::assume_valid(sym, lambda);
  }

  double clipped = 0.0;
  for (Eigen::Index i = 0; i < gamma.size(); ++i) clipped += std::max(0.0, gamma[i]);
  const double shift =
      clipped <= budget ? 0.0 : threshold_root({gamma.data(), static_cast<std::size_t>(gamma.size())}, budget);

  const Vector theta = (gamma.array() - shift).max(0.0).matrix();
  const Matrix& U = eig.eigenvectors();
  Matrix rebuilt = U * theta.asDiagonal() * U.transpose();
  return Representation::assume_valid(symmetrize(rebuilt), lambda);
}

}  // namespace metalearn
