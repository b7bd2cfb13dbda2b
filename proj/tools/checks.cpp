#include "checks.hpp"

#include "oracles.hpp"

#include "metalearn/batch.hpp"
#include "metalearn/environments.hpp"
#include "metalearn/evaluation.hpp"
#include "metalearn/online.hpp"
#include "metalearn/projection.hpp"
#include "metalearn/ridge_loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace metalearn::checks {

namespace {

std::string format_detail(const std::string& what, double value) {
  std::ostringstream os;
  os << what << " = " << value;
  return os.str();
}

CheckResult at_most(std::string name, double worst, double threshold, const std::string& what) {
  return CheckResult{std::move(name), worst <= threshold, worst, threshold, format_detail(what, worst)};
}

}  // namespace

CheckResult gradient_suite(int trials, std::uint64_t seed) {
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = child_rng(seed, 100, static_cast<std::uint64_t>(trial));
    const double lambda = oracle::uniform(rng, 0.5, 2.0);
    const TaskDataset Z = oracle::random_compliant_dataset(8, 6, rng);
    const Representation D = Representation::make(
        oracle::random_feasible(6, lambda, oracle::uniform(rng, 0.2, 0.9), 0.2, rng), lambda);
    const Matrix analytic = meta_gradient(D, Z);
    const Matrix numeric = oracle::finite_difference_gradient(D, Z, 1e-5);
    const double rel = (analytic - numeric).norm() / std::max(analytic.norm(), 1e-300);
    worst = std::max(worst, rel);
  }
  return at_most("gradient", worst, 1e-5, "max relative error vs central differences");
}

CheckResult closed_form_suite(int trials, std::uint64_t seed) {
  double worst_consistency = 0.0;
  double worst_oracle = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = child_rng(seed, 101, static_cast<std::uint64_t>(trial));
    const auto d = static_cast<Eigen::Index>(1 + rng() % 8);
    const auto n = static_cast<Eigen::Index>(1 + rng() % 12);
    const double lambda = std::pow(10.0, oracle::uniform(rng, -1.0, 1.0));
    const TaskDataset Z = oracle::random_compliant_dataset(n, d, rng);
    const Eigen::Index rank = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(d));
    const Matrix raw = (trial % 2 == 0)
                           ? oracle::random_feasible(d, lambda, oracle::uniform(rng, 0.1, 1.0), 0.0, rng)
                           : oracle::random_low_rank(d, rank, lambda, oracle::uniform(rng, 0.1, 1.0), rng);
    const Representation D = Representation::make(raw, lambda);

    const LinearPredictor w = ridge_solve(D, Z);
    worst_consistency =
        std::max(worst_consistency, std::abs(meta_loss(D, Z).value - empirical_risk(w, Z)));
    const double floor = 1e-10 * std::max(1.0, D.matrix().norm());
    worst_oracle = std::max(worst_oracle, (w.weights - oracle::ridge_on_range(raw, Z, floor)).norm());
  }
  CheckResult result;
  result.name = "closed_form";
  result.passed = worst_consistency <= 1e-10 && worst_oracle <= 1e-8;
  result.metric = std::max(worst_consistency / 1e-10, worst_oracle / 1e-8);
  result.threshold = 1.0;
  std::ostringstream os;
  os << "max |L - R(w)| = " << worst_consistency << " (<= 1e-10), max ||w - w_oracle|| = "
     << worst_oracle << " (<= 1e-8)";
  result.detail = os.str();
  return result;
}

std::vector<CheckResult> properties_suite(int pairs, std::uint64_t seed) {
  double loss_excess = 0.0;      // max distance of a loss outside [0, 1]
  double lipschitz_ratio = 0.0;  // max |dL| / ||dD||
  double gradient_ratio = 0.0;   // max ||d grad|| / ||dD||
  double convexity_gap = -1.0;   // max L(mid) - mean(L)
  for (int trial = 0; trial < pairs; ++trial) {
    Rng rng = child_rng(seed, 102, static_cast<std::uint64_t>(trial));
    const auto d = static_cast<Eigen::Index>(1 + rng() % 8);
    const auto n = static_cast<Eigen::Index>(1 + rng() % 12);
    const double lambda = std::pow(10.0, oracle::uniform(rng, -2.0, 1.0));
    const TaskDataset Z = oracle::random_compliant_dataset(n, d, rng);
    const Matrix A = oracle::random_feasible(d, lambda, oracle::uniform(rng, 0.0, 1.0), 0.0, rng);
    Matrix B = oracle::random_feasible(d, lambda, oracle::uniform(rng, 0.0, 1.0), 0.0, rng);
    if (trial % 4 == 0) {
      // nearby pairs probe the local slope
      const double t = oracle::uniform(rng, 1e-4, 1e-2);
      B = (1.0 - t) * A + t * B;
    }
    const Representation D1 = Representation::make(A, lambda);
    const Representation D2 = Representation::make(B, lambda);
    const Representation mid = Representation::make(0.5 * (A + B), lambda);

    const LossEval e1 = meta_loss(D1, Z);
    const LossEval e2 = meta_loss(D2, Z);
    for (double value : {e1.value, e2.value}) {
      loss_excess = std::max({loss_excess, -value, value - 1.0});
    }
    const double dist = (A - B).norm();
    if (dist > 0.0) {
      lipschitz_ratio = std::max(lipschitz_ratio, std::abs(e1.value - e2.value) / dist);
      gradient_ratio =
          std::max(gradient_ratio, (meta_gradient(e1, Z) - meta_gradient(e2, Z)).norm() / dist);
    }
    convexity_gap =
        std::max(convexity_gap, meta_loss(mid, Z).value - 0.5 * (e1.value + e2.value));
  }
  return {
      at_most("loss_bounded", loss_excess, 0.0, "max distance of L outside [0,1]"),
      at_most("loss_lipschitz", lipschitz_ratio, 2.0, "max |dL| / ||dD||_F"),
      at_most("gradient_lipschitz", gradient_ratio, 6.0, "max ||d grad||_F / ||dD||_F"),
      at_most("midpoint_convexity", convexity_gap, 1e-10, "max L(mid) - (L1 + L2) / 2"),
  };
}

std::vector<CheckResult> projection_suite(int trials, std::uint64_t seed) {
  constexpr Eigen::Index d = 5;
  double oracle_gap = 0.0;
  double kkt = 0.0;
  double idempotence = 0.0;
  double minimality = -1.0;  // max ||P(Q) - Q|| - ||D - Q||
  double expansion = -1.0;   // max ||P(Q1) - P(Q2)|| - ||Q1 - Q2||
  double infeasibility = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = child_rng(seed, 103, static_cast<std::uint64_t>(trial));
    const double lambda = std::pow(10.0, oracle::uniform(rng, -1.0, 1.0));
    const double scale = std::pow(10.0, oracle::uniform(rng, -2.0, 1.0)) / lambda;
    Matrix Q = oracle::random_symmetric(d, scale, rng);
    if (trial % 5 == 0) Q += 2.0 * scale * Matrix::Identity(d, d);

    const Representation P = project(Q, lambda);
    const oracle::ProjectionCertificate cert = oracle::bisection_projection(Q, lambda);
    oracle_gap = std::max(oracle_gap, (P.matrix() - cert.projected).norm());
    kkt = std::max(kkt, cert.kkt_residual);
    idempotence = std::max(idempotence, (project(P.matrix(), lambda).matrix() - P.matrix()).norm());
    if (feasibility_violation(P.matrix(), lambda)) infeasibility = 1.0;

    if (trial < 100) {
      const double own = (P.matrix() - Q).norm();
      for (int k = 0; k < 100; ++k) {
        const Matrix D = oracle::random_feasible(d, lambda, oracle::uniform(rng, 0.0, 1.0),
                                                 oracle::uniform(rng, 0.0, 1.0), rng);
        minimality = std::max(minimality, own - (D - Q).norm());
      }
    }
    // Non-expansiveness needs a common constraint set: pair Q with a
    // perturbed copy under the same lambda.
    const Matrix Q2 = Q + oracle::random_symmetric(d, scale * oracle::uniform(rng, 0.01, 1.0), rng);
    expansion = std::max(expansion, (project(Q2, lambda).matrix() - P.matrix()).norm() - (Q2 - Q).norm());
  }
  return {
      at_most("projection_oracle", oracle_gap, 1e-8, "max ||P(Q) - P_bisection(Q)||_F"),
      at_most("projection_kkt", kkt, 1e-10, "max scaled KKT residual of the oracle"),
      at_most("projection_idempotent", idempotence, 1e-10, "max ||P(P(Q)) - P(Q)||_F"),
      at_most("projection_minimal", minimality, 1e-10, "max ||P(Q) - Q|| - ||D - Q||"),
      at_most("projection_nonexpansive", expansion, 1e-10, "max ||P(Q1) - P(Q2)|| - ||Q1 - Q2||"),
      at_most("projection_feasible", infeasibility, 0.0, "infeasible outputs"),
  };
}

std::vector<CheckResult> regret_suite(std::int64_t tasks, const std::vector<double>& lambdas,
                                      const std::vector<std::uint64_t>& seeds) {
  std::vector<CheckResult> results;
  for (double lambda : lambdas) {
    for (std::uint64_t seed : seeds) {
      const EnvironmentSpec spec = EnvironmentSpec::make(10, 10, std::sqrt(0.2), seed);
      std::vector<TaskDataset> stream;
      stream.reserve(static_cast<std::size_t>(tasks));
      for (std::int64_t t = 0; t < tasks; ++t) {
        stream.push_back(sample_task(spec, StreamPurpose::Train, static_cast<std::uint64_t>(t)).split.train);
      }
      OnlineResult run = run_online(stream_from(stream), spec.d, lambda, tasks, AuditMode::On);
      const RegretReport report = regret(run.ledger, lambda);
      const double bound = regret_bound(lambda, tasks);

      std::ostringstream name;
      name << "regret[lambda=" << lambda << ",seed=" << seed << "]";
      std::ostringstream detail;
      detail << "regret = " << report.regret << " in [-1e-6, " << bound
             << "], average loss = " << report.average_loss << ", comparator = " << report.comparator
             << (report.comparator_converged ? "" : " (comparator not converged)");
      results.push_back(CheckResult{name.str(),
                                    report.regret >= -1e-6 && report.regret <= bound &&
                                        report.comparator_converged,
                                    report.regret, bound, detail.str()});
    }
  }
  return results;
}

CheckResult covariance_suite(std::int64_t samples, std::int64_t d, std::uint64_t seed) {
  constexpr std::int64_t kRowsPerBlock = 1000;
  std::vector<TaskDataset> blocks;
  for (std::int64_t done = 0, block = 0; done < samples; done += kRowsPerBlock, ++block) {
    const std::int64_t rows = std::min(kRowsPerBlock, samples - done);
    Rng rng = child_rng(seed, 104, static_cast<std::uint64_t>(block));
    Matrix X(rows, d);
    for (std::int64_t i = 0; i < rows; ++i) X.row(i) = sample_unit_sphere(d, rng).transpose();
    blocks.push_back(validate_dataset(std::move(X), Vector::Zero(rows), false));
  }
  const double estimate = covariance_norm_estimate(blocks);
  const double target = 1.0 / static_cast<double>(d);
  const double rel = std::abs(estimate - target) / target;
  CheckResult result = at_most("covariance", rel, 0.2, "relative deviation from 1/d");
  result.detail += " (estimate " + std::to_string(estimate) + ")";
  return result;
}

}  // namespace metalearn::checks
