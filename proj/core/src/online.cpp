#include "metalearn/online.hpp"

#include "metalearn/batch.hpp"
#include "metalearn/errors.hpp"
#include "metalearn/projection.hpp"
#include "metalearn/ridge_loss.hpp"

#include <cmath>
#include <sstream>

namespace metalearn {

TaskStream stream_from(std::span<const TaskDataset> tasks) {
  return [tasks, next = std::size_t{0}]() mutable -> std::optional<TaskDataset> {
    if (next >= tasks.size()) return std::nullopt;
    return tasks[next++];
  };
}

OnlineLearnerState init_learner(Eigen::Index d, double lambda, AuditMode audit) {
  if (d < 1) fail(ErrorCode::InvalidParameter, "dimension must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorCode::InvalidParameter, "lambda must be positive and finite");
  }
  const Representation first = Representation::isotropic(d, lambda);
  OnlineLearnerState state{first, first, first, 1, 0.0, audit == AuditMode::On, false, {}};
  if (state.audit) state.ledger.iterates.push_back(first.matrix());
  return state;
}

double step_size(double lambda, std::int64_t t) {
  return 1.0 / (lambda * std::sqrt(2.0 * static_cast<double>(t)));
}

void step(OnlineLearnerState& state, const TaskDataset& Z) {
  const double lambda = state.current.lambda();
  if (Z.d() != state.current.dim()) {
    std::ostringstream os;
    os << "learner has d = " << state.current.dim() << " but dataset has d = " << Z.d();
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  if (!Z.theory_compliant() && !state.warned_noncompliant) {
    warn("online step on a dataset outside ||x|| <= 1, y in [0,1]; regret guarantees do not apply");
    state.warned_noncompliant = true;
  }

  const LossEval eval = meta_loss(state.current, Z);
  const Matrix gradient = meta_gradient(eval, Z);
  const double gamma = step_size(lambda, state.t);
  Representation next = project(state.current.matrix() - gamma * gradient, lambda);

  state.ledger.losses.push_back(eval.value);
  state.cumulative_loss += eval.value;
  if (state.audit) {
    state.ledger.retained.push_back(Z);
    state.ledger.iterates.push_back(next.matrix());
  }

  // The output now covers D^(1..t), the iterates that have paid a loss.
  state.output = state.average;
  const auto t = static_cast<double>(state.t);
  Matrix averaged = (t * state.average.matrix() + next.matrix()) / (t + 1.0);
  state.average = Representation::assume_valid(std::move(averaged), lambda);
  state.current = std::move(next);
  ++state.t;
}

OnlineResult run_online(const TaskStream& stream, Eigen::Index d, double lambda, std::int64_t T,
                        AuditMode audit) {
  if (T < 1) fail(ErrorCode::InvalidParameter, "T must be >= 1");
  OnlineLearnerState state = init_learner(d, lambda, audit);
  for (std::int64_t i = 0; i < T; ++i) {
    std::optional<TaskDataset> Z = stream();
    if (!Z) {
      std::ostringstream os;
      os << "stream ended after " << i << " of " << T << " datasets";
      fail(ErrorCode::StreamExhausted, os.str());
    }
    step(state, *Z);
  }
  return OnlineResult{std::move(state.output), std::move(state.ledger)};
}

RegretReport regret(RegretLedger& ledger, double lambda) {
  if (ledger.losses.empty()) fail(ErrorCode::PreconditionViolated, "ledger has no steps");
  if (ledger.retained.size() != ledger.losses.size()) {
    fail(ErrorCode::AuditModeOff, "regret needs the datasets retained in audit mode");
  }
  RegretReport report;
  double total = 0.0;
  for (double loss : ledger.losses) total += loss;
  report.average_loss = total / static_cast<double>(ledger.losses.size());

  const BatchResult best = solve(ledger.retained, lambda, std::nullopt, BatchOptions::comparator());
  ledger.comparator_value = best.objective;
  report.comparator = best.objective;
  report.comparator_converged = best.converged;
  report.regret = report.average_loss - report.comparator;
  return report;
}

double regret_bound(double lambda, std::int64_t T) {
  return 4.0 * std::sqrt(2.0) / (lambda * std::sqrt(static_cast<double>(T)));
}

}  // namespace metalearn
