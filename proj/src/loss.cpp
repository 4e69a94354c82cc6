#include "sqrdln/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace sqrdln {

double pinball_loss(std::span<const double> y, std::span<const double> y_hat, double tau) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("pinball_loss: shape mismatch");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("pinball_loss: tau outside [0,1]");
  if (y.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += pinball(y[i], y_hat[i], tau);
  return total / static_cast<double>(y.size());
}

double mean_absolute_loss(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("mean_absolute_loss: shape mismatch");
  if (y.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += std::abs(y[i] - y_hat[i]);
  return total / static_cast<double>(y.size());
}

}  // namespace sqrdln
