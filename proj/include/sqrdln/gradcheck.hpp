#pragma once

#include <functional>

#include "sqrdln/parameter.hpp"

namespace sqrdln {

/// Compares analytic gradients against central differences.
///
/// `loss_fn` must return the loss and accumulate the analytic gradient into
/// the blocks' grad buffers (the checker zeroes them first). Returns the
/// maximum of |analytic - numeric| / max(1, |analytic|) over every entry.
/// Throws std::runtime_error when the loss is not finite.
double finite_difference_check(const std::function<double()>& loss_fn,
                               const ParameterList& params, double h = 1e-5);

}  // namespace sqrdln
