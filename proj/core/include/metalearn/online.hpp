#pragma once

// Projected stochastic gradient descent on the future empirical risk: one
// gradient step of L_{Z_t} plus a projection per incoming task, with the
// iterates averaged into the returned representation.

#include "metalearn/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace metalearn {

/// Pulls the next task; std::nullopt once the source is exhausted.
using TaskStream = std::function<std::optional<TaskDataset>()>;

/// Stream over an existing list (copies each dataset as it is yielded).
TaskStream stream_from(std::span<const TaskDataset> tasks);

struct RegretLedger {
  std::vector<double> losses;  // L_{Z_t}(D^(t)), one per step
  std::vector<TaskDataset> retained;  // audit mode only
  std::vector<Matrix> iterates;       // audit mode only: D^(1), D^(2), ...
  std::optional<double> comparator_value;
};

enum class AuditMode { Off, On };

struct OnlineLearnerState {
  Representation current;  // D^(t)
  Representation average;  // mean of D^(1..t)
  /// Mean of the iterates at which losses have been paid, D^(1..t-1); equal
  /// to D^(1) before the first step. This is the learner's output.
  Representation output;
  std::int64_t t = 1;
  double cumulative_loss = 0.0;
  bool audit = false;
  bool warned_noncompliant = false;
  RegretLedger ledger;
};

/// D^(1) = I / (lambda d), t = 1.
OnlineLearnerState init_learner(Eigen::Index d, double lambda, AuditMode audit = AuditMode::Off);

/// gamma_t = 1 / (lambda sqrt(2 t)).
double step_size(double lambda, std::int64_t t);

/// Pays L_Z(D^(t)), then D^(t+1) = proj(D^(t) - gamma_t grad L_Z(D^(t))).
void step(OnlineLearnerState& state, const TaskDataset& Z);

struct OnlineResult {
  Representation representation;  // mean of D^(1..T)
  RegretLedger ledger;
};

/// Consumes exactly T datasets from `stream`.
OnlineResult run_online(const TaskStream& stream, Eigen::Index d, double lambda, std::int64_t T,
                        AuditMode audit = AuditMode::Off);

struct RegretReport {
  double average_loss = 0.0;
  double comparator = 0.0;  // min over the constraint set of the average retained loss
  double regret = 0.0;
  bool comparator_converged = false;
};

/// Average paid loss minus the best fixed representation in hindsight; the
/// comparator is computed by the batch solver on the retained datasets.
RegretReport regret(RegretLedger& ledger, double lambda);

/// 4 sqrt(2) / (lambda sqrt(T)).
double regret_bound(double lambda, std::int64_t T);

}  // namespace metalearn
