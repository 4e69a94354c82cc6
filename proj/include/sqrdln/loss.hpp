#pragma once

#include <span>

namespace sqrdln {

/// Pinball loss of one residual: tau*(y - yhat) if y >= yhat, else (1 - tau)*(yhat - y).
inline double pinball(double y, double y_hat, double tau) {
  const double diff = y - y_hat;
  return diff >= 0.0 ? tau * diff : (tau - 1.0) * diff;
}

/// d pinball / d yhat (right-continuous at the kink).
inline double pinball_grad(double y, double y_hat, double tau) {
  return y - y_hat >= 0.0 ? -tau : 1.0 - tau;
}

/// Mean pinball loss over entries. Throws std::invalid_argument on a shape
/// mismatch or tau outside [0, 1].
double pinball_loss(std::span<const double> y, std::span<const double> y_hat, double tau);

/// Mean absolute error over entries.
double mean_absolute_loss(std::span<const double> y, std::span<const double> y_hat);

}  // namespace sqrdln
