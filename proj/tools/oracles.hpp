#pragma once

// Reference computations that deliberately avoid the library's code paths:
// finite differences of the loss, the ridge stationarity system restricted to
// Ran(D), and a bisection-based projection with a KKT certificate. Used by the
// `check` command and by the test suites.

#include "metalearn/environments.hpp"
#include "metalearn/types.hpp"

namespace metalearn::oracle {

/// Central differences of meta_loss along the symmetric basis E_ij + E_ji.
Matrix finite_difference_gradient(const Representation& D, const TaskDataset& Z, double h);

/// -n X^T M^{-1} S M^{-1} X evaluated literally with dense inverses.
Matrix literal_gradient(const Matrix& D, const TaskDataset& Z);

/// Minimiser of (1/n)||X w - y||^2 + w^T D^+ w over Ran(D), from the normal
/// equations in the eigenbasis of D (eigenvalues above eig_floor span Ran(D)).
Vector ridge_on_range(const Matrix& D, const TaskDataset& Z, double eig_floor = 1e-10);

struct ProjectionCertificate {
  Matrix projected;
  double shift = 0.0;          // the shrinkage a
  double kkt_residual = 0.0;   // max violation of the optimality conditions
};

/// Projection onto {PSD, tr <= 1/lambda} with the shrinkage found by bisection.
ProjectionCertificate bisection_projection(const Matrix& Q, double lambda);

/// Shrinkage by bisection on [0, max eig] (0 when clipping fits the budget).
double bisection_threshold(const Vector& eigs, double budget);

// Random instance generators.

/// Rows in the unit ball (radius uniform in [0, 1]), outputs uniform in [0, 1].
TaskDataset random_compliant_dataset(Eigen::Index n, Eigen::Index d, Rng& rng);

/// Random symmetric matrix with N(0, scale^2) entries.
Matrix random_symmetric(Eigen::Index d, double scale, Rng& rng);

/// Random feasible point with trace fill * budget. With `margin` > 0 every
/// eigenvalue is at least margin * budget / d (strict interior).
Matrix random_feasible(Eigen::Index d, double lambda, double fill, double margin, Rng& rng);

/// Random PSD matrix of the given rank with trace fill * budget.
Matrix random_low_rank(Eigen::Index d, Eigen::Index rank, double lambda, double fill, Rng& rng);

double uniform(Rng& rng, double lo, double hi);

}  // namespace metalearn::oracle
