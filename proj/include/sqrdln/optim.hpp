#pragma once

#include <cstddef>
#include <vector>

#include "sqrdln/parameter.hpp"

namespace sqrdln {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers are created lazily on the first
/// step and keyed by position in the parameter list.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  double learning_rate() const { return config_.learning_rate; }
  const AdamConfig& config() const { return config_; }
  long step_count() const { return step_count_; }

  /// Applies one update. Constraints are not enforced here.
  void step(const ParameterList& params);

 private:
  AdamConfig config_;
  long step_count_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

/// Learning-rate schedule composed of fixed epoch milestones and reductions
/// triggered by consecutive increases of the validation score. Either part may
/// be disabled (empty milestones / zero patience).
struct Scheduler {
  double base_lr = 1e-3;
  std::vector<int> milestones;
  double milestone_factor = 0.1;
  int increase_patience = 0;
  double increase_factor = 0.1;

  static Scheduler step_at_epochs(double base_lr, std::vector<int> epochs, double factor);
  static Scheduler step_on_increase(double base_lr, int patience, double factor);
};

/// Learning rate for the epoch with zero-based index `epoch`, given the
/// validation scores of the epochs completed so far (oldest first).
double schedule_lr(const Scheduler& sched, int epoch,
                   const std::vector<double>& validation_history);

/// Number of reductions triggered by `history`: runs of `patience` consecutive
/// increases each fire once, and the run counter restarts after firing.
int count_increase_triggers(const std::vector<double>& history, int patience);

}  // namespace sqrdln
