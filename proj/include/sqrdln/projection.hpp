#pragma once

#include <span>
#include <vector>

#include "sqrdln/parameter.hpp"

namespace sqrdln {

/// L2 isotonic regression (nondecreasing) by pool-adjacent-violators.
/// Optional weights must be positive; empty weights mean all ones.
std::vector<double> isotonic_regression(std::span<const double> y,
                                        std::span<const double> weights = {});

// The stopping tolerance is two orders below the 1e-9 idempotence target:
// Dykstra converges linearly, so the distance to the true projection can be
// many times the last per-sweep change.
struct ProjectionOptions {
  double tolerance = 1e-11;
  int max_sweeps = 5000;
};

struct ProjectionReport {
  int sweeps = 0;
  double last_change = 0.0;
};

/// Projects the block onto its constraint set in place.
///
/// Nonnegative blocks are clipped at zero. Monotone blocks are projected in
/// the Euclidean sense onto the cone of arrays nondecreasing along every
/// flagged dimension: a single flagged dimension is solved exactly by
/// isotonic regression along each chain, several dimensions by Dykstra's
/// alternating projections over the per-dimension chain sets.
ProjectionReport project_monotone(ParameterBlock& block, const ProjectionOptions& options = {});

/// Array form used by the block version: projects `values` (row-major with
/// `shape`) onto the cone nondecreasing along each of `dims`.
ProjectionReport project_monotone_array(std::vector<double>& values,
                                        const std::vector<std::size_t>& shape,
                                        const std::vector<std::size_t>& dims,
                                        const ProjectionOptions& options = {});

/// Applies project_monotone to every constrained block in the list.
void apply_constraints(const ParameterList& params);

}  // namespace sqrdln
