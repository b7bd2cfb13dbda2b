#pragma once

// Property suites behind `metalearn check` and the acceptance tests. Each suite
// compares the library against the independent routes in oracles.hpp.

#include <cstdint>
#include <string>
#include <vector>

namespace metalearn::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  double metric = 0.0;     // worst observed value
  double threshold = 0.0;  // what `metric` is compared against
  std::string detail;
};

/// Analytic gradient vs central differences (step 1e-5), d = 6, n = 8.
CheckResult gradient_suite(int trials = 20, std::uint64_t seed = 1);

/// meta_loss vs empirical_risk(ridge_solve) and ridge_solve vs the
/// stationarity oracle on Ran(D).
CheckResult closed_form_suite(int trials = 100, std::uint64_t seed = 2);

/// Bounded loss, 2-Lipschitz loss, 6-Lipschitz gradient and midpoint
/// convexity on random compliant pairs. Returns one result per property.
std::vector<CheckResult> properties_suite(int pairs = 200, std::uint64_t seed = 3);

/// Oracle equivalence, idempotence, minimality, non-expansiveness and
/// feasibility of the projection on random symmetric 5x5 inputs.
std::vector<CheckResult> projection_suite(int trials = 500, std::uint64_t seed = 4);

/// Online regret against the batch comparator on synthetic d = 10, n = 10
/// streams; one result per (lambda, seed).
std::vector<CheckResult> regret_suite(std::int64_t tasks, const std::vector<double>& lambdas,
                                      const std::vector<std::uint64_t>& seeds);

/// Pooled second-moment norm of uniform-sphere samples vs 1/d.
CheckResult covariance_suite(std::int64_t samples = 100000, std::int64_t d = 50,
                             std::uint64_t seed = 5);

}  // namespace metalearn::checks
