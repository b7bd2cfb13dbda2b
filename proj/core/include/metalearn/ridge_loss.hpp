#pragma once

// Ridge regression parameterised by a representation D,
//
//   w(D, Z) = argmin_{w in Ran(D)} (1/n) sum_i (<w, x_i> - y_i)^2 + w^T D^+ w
//           = D X^T M(D)^{-1} y,        M(D) = X D X^T + n I,
//
// together with the meta-loss L_Z(D) = R_Z(w(D, Z)) = n ||M(D)^{-1} y||^2
// and its gradient with respect to D.

#include "metalearn/types.hpp"

#include <memory>

namespace metalearn {

/// Factorisation of M(D) = X D X^T + n I and the vector M(D)^{-1} y, shared by
/// the loss and its gradient.
struct RidgeSystem {
  Eigen::LLT<Matrix> factor;
  Vector solved_outputs;  // M(D)^{-1} y
};

struct LossEval {
  double value = 0.0;
  std::shared_ptr<const RidgeSystem> solver_cache;
};

/// w = D X^T (X D X^T + n I)^{-1} y.
LinearPredictor ridge_solve(const Representation& D, const TaskDataset& Z);

/// L_Z(D) = n ||M(D)^{-1} y||^2, equal to empirical_risk(ridge_solve(D, Z), Z).
LossEval meta_loss(const Representation& D, const TaskDataset& Z);

/// Gradient of L_Z at D:
///   -n X^T M^{-1} (y y^T M^{-1} + M^{-1} y y^T) M^{-1} X.
/// With a = M^{-1} y and b = M^{-1} a this is -n (u v^T + v u^T) for
/// u = X^T a, v = X^T b, so it costs one extra triangular solve pair.
Matrix meta_gradient(const Representation& D, const TaskDataset& Z);

/// Gradient reusing the factorisation held by `eval`.
Matrix meta_gradient(const LossEval& eval, const TaskDataset& Z);

/// (1/n) sum_i (<w, x_i> - y_i)^2.
double empirical_risk(const LinearPredictor& w, const TaskDataset& Z);

/// Norm of the component of w orthogonal to the span of the eigenvectors of D
/// with eigenvalue above `eig_floor`. Zero (up to rounding) for every
/// ridge_solve output.
double range_residual(const Representation& D, const Vector& w, double eig_floor = 1e-10);

}  // namespace metalearn
