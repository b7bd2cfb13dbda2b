#include "oracles.hpp"

#include "metalearn/errors.hpp"
#include "metalearn/ridge_loss.hpp"

#include <algorithm>
#include <cmath>

namespace metalearn::oracle {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Matrix finite_difference_gradient(const Representation& D, const TaskDataset& Z, double h) {
  const Eigen::Index d = D.dim();
  Matrix grad(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      Matrix direction = Matrix::Zero(d, d);
      direction(i, j) += 1.0;
      direction(j, i) += (i == j) ? 0.0 : 1.0;
      const Representation up = Representation::make(D.matrix() + h * direction, D.lambda());
      const Representation down = Representation::make(D.matrix() - h * direction, D.lambda());
      const double slope = (meta_loss(up, Z).value - meta_loss(down, Z).value) / (2.0 * h);
      // <G, E_ij + E_ji> = 2 G_ij off the diagonal.
      grad(i, j) = grad(j, i) = (i == j) ? slope : slope / 2.0;
    }
  }
  return grad;
}

Matrix literal_gradient(const Matrix& D, const TaskDataset& Z) {
  const Matrix& X = Z.inputs();
  const Vector& y = Z.outputs();
  const auto n = static_cast<double>(Z.n());
  const Matrix M = X * D * X.transpose() + n * Matrix::Identity(Z.n(), Z.n());
  const Matrix M_inv = M.inverse();
  const Matrix yy = y * y.transpose();
  const Matrix S = yy * M_inv + M_inv * yy;
  return -n * X.transpose() * M_inv * S * M_inv * X;
}

Vector ridge_on_range(const Matrix& D, const TaskDataset& Z, double eig_floor) {
  const Eigen::Index d = D.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(D);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (eig.eigenvalues()[i] > eig_floor) keep.push_back(i);
  }
  if (keep.empty()) return Vector::Zero(d);

  const Matrix basis = eig.eigenvectors()(Eigen::all, keep);
  const Vector eigs = eig.eigenvalues()(keep);
  const auto n = static_cast<double>(Z.n());
  const Matrix XU = Z.inputs() * basis;
  // d/dc [(1/n)||X U c - y||^2 + c^T diag(1/eigs) c] = 0
  Matrix normal = XU.transpose() * XU / n;
  normal.diagonal() += eigs.cwiseInverse();
  const Vector rhs = XU.transpose() * Z.outputs() / n;
  const Vector coeffs = normal.fullPivLu().solve(rhs);
  return basis * coeffs;
}

double bisection_threshold(const Vector& eigs, double budget) {
  auto excess = [&](double a) { return (eigs.array() - a).max(0.0).sum() - budget; };
  if (excess(0.0) <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = std::max(0.0, eigs.maxCoeff());
  for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ProjectionCertificate bisection_projection(const Matrix& Q, double lambda) {
  const Matrix sym = 0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& gamma = eig.eigenvalues();
  const double budget = 1.0 / lambda;

  ProjectionCertificate cert;
  cert.shift = bisection_threshold(gamma, budget);
  const Vector theta = (gamma.array() - cert.shift).max(0.0).matrix();
  cert.projected = eig.eigenvectors() * theta.asDiagonal() * eig.eigenvectors().transpose();

  // theta_i >= 0, theta_i >= gamma_i - a, theta_i (theta_i - gamma_i + a) = 0,
  // sum theta <= budget, a (budget - sum theta) = 0.
  const double scale = std::max({1.0, budget, gamma.cwiseAbs().maxCoeff()});
  double residual = std::max(0.0, theta.sum() - budget);
  residual = std::max(residual, cert.shift * std::abs(budget - theta.sum()));
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    residual = std::max(residual, std::max(0.0, -theta[i]));
    residual = std::max(residual, std::max(0.0, gamma[i] - cert.shift - theta[i]));
    residual = std::max(residual, std::abs(theta[i] * (theta[i] - gamma[i] + cert.shift)));
  }
  cert.kkt_residual = residual / scale;
  return cert;
}

TaskDataset random_compliant_dataset(Eigen::Index n, Eigen::Index d, Rng& rng) {
  Matrix X(n, d);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double radius = uniform(rng, 0.0, 1.0);
    X.row(i) = radius * sample_unit_sphere(d, rng).transpose();
    y[i] = uniform(rng, 0.0, 1.0);
  }
  return validate_dataset(std::move(X), std::move(y), true);
}

Matrix random_symmetric(Eigen::Index d, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix A(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) A(i, j) = A(j, i) = normal(rng);
  }
  return A;
}

Matrix random_feasible(Eigen::Index d, double lambda, double fill, double margin, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix B(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) B(i, j) = normal(rng);
  }
  Matrix psd = B * B.transpose();
  psd = symmetrize(psd);
  psd /= psd.trace();
  const double dd = static_cast<double>(d);
  Matrix mixed = (1.0 - margin) * psd + margin * Matrix::Identity(d, d) / dd;
  return fill / lambda * mixed;
}

Matrix random_low_rank(Eigen::Index d, Eigen::Index rank, double lambda, double fill, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix B(d, rank);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < rank; ++j) B(i, j) = normal(rng);
  }
  Matrix psd = B * B.transpose();
  psd = symmetrize(psd);
  return fill / lambda * psd / psd.trace();
}

}  // namespace metalearn::oracle
