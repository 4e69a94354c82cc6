#include "sqrdln/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace sqrdln {

void Adam::step(const ParameterList& params) {
  if (first_moment_.empty()) {
    first_moment_.reserve(params.size());
    second_moment_.reserve(params.size());
    for (const auto* p : params) {
      first_moment_.emplace_back(p->size(), 0.0);
      second_moment_.emplace_back(p->size(), 0.0);
    }
  }
  if (first_moment_.size() != params.size()) {
    throw std::invalid_argument("Adam: parameter list changed between steps");
  }
  ++step_count_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    ParameterBlock& p = *params[k];
    p.check_shape();
    auto& m = first_moment_[k];
    auto& v = second_moment_[k];
    if (m.size() != p.size()) {
      throw std::invalid_argument("Adam: moment shape mismatch for '" + p.name() + "'");
    }
    auto& values = p.values();
    const auto& grad = p.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

Scheduler Scheduler::step_at_epochs(double base_lr, std::vector<int> epochs, double factor) {
  Scheduler s;
  s.base_lr = base_lr;
  s.milestones = std::move(epochs);
  s.milestone_factor = factor;
  return s;
}

Scheduler Scheduler::step_on_increase(double base_lr, int patience, double factor) {
  Scheduler s;
  s.base_lr = base_lr;
  s.increase_patience = patience;
  s.increase_factor = factor;
  return s;
}

int count_increase_triggers(const std::vector<double>& history, int patience) {
  if (patience <= 0) return 0;
  int triggers = 0;
  int run = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] > history[i - 1]) {
      if (++run == patience) {
        ++triggers;
        run = 0;
      }
    } else {
      run = 0;
    }
  }
  return triggers;
}

double schedule_lr(const Scheduler& sched, int epoch,
                   const std::vector<double>& validation_history) {
  double lr = sched.base_lr;
  for (int m : sched.milestones) {
    if (epoch >= m) lr *= sched.milestone_factor;
  }
  const int fired = count_increase_triggers(validation_history, sched.increase_patience);
  for (int i = 0; i < fired; ++i) lr *= sched.increase_factor;
  return lr;
}

}  // namespace sqrdln
