#pragma once

#include "metalearn/types.hpp"

#include <span>

namespace metalearn {

/// Frobenius-nearest point of {D PSD, tr(D) <= 1/lambda} to the symmetric
/// matrix Q. With Q = U diag(g) U^T the result is U diag(max(0, g_i - a)) U^T,
/// where a = 0 when the clipped spectrum already fits the trace budget and
/// otherwise solves sum_i max(0, g_i - a) = 1/lambda. A Q that is already
/// feasible is returned unchanged.
Representation project(const Matrix& Q, double lambda);

/// Shrinkage a > 0 with sum_i max(0, eigs_i - a) = budget, found by sorting the
/// eigenvalues and scanning the breakpoints of the piecewise-linear left side.
/// Requires sum_i max(0, eigs_i) > budget.
double threshold_root(std::span<const double> eigs, double budget);

}  // namespace metalearn
