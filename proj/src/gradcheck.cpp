#include "sqrdln/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqrdln {

namespace {
double finite_or_throw(double v) {
  if (!std::isfinite(v)) throw std::runtime_error("finite_difference_check: non-finite loss");
  return v;
}
}  // namespace

double finite_difference_check(const std::function<double()>& loss_fn,
                               const ParameterList& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_check: h must be positive");
  zero_grads(params);
  finite_or_throw(loss_fn());
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto* p : params) analytic.push_back(p->grad());

  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& values = params[k]->values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      zero_grads(params);
      const double up = finite_or_throw(loss_fn());
      values[i] = saved - h;
      zero_grads(params);
      const double down = finite_or_throw(loss_fn());
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[k][i];
      worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->grad() = analytic[k];
  return worst;
}

}  // namespace sqrdln
