#pragma once

#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "sqrdln/dataset.hpp"
#include "sqrdln/model.hpp"
#include "sqrdln/optim.hpp"

namespace sqrdln {

/// Raised when training produces a non-finite loss or gradient.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TauSampling { PerBatch, PerSample };

struct TrainConfig {
  int epochs = 10;
  std::size_t batch_size = 64;
  Scheduler scheduler = Scheduler::step_at_epochs(1e-3, {1, 2, 3, 4}, 0.5);
  AdamConfig adam;  // learning_rate is overwritten by the scheduler
  std::uint64_t seed = 1;
  TauSampling tau_sampling = TauSampling::PerBatch;
  /// Epochs without validation improvement before stopping; 0 disables.
  int early_stopping_patience = 5;
  std::vector<double> validation_taus = default_quantile_grid();

  void validate() const;
};

/// Optimizer settings that worked best for each head on the irradiance data.
TrainConfig default_train_config(HeadKind kind);

struct EpochLog {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_crps = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  double initial_validation_crps = 0.0;
  int best_epoch = 0;  // 0 when no epoch ran
  double best_validation_crps = 0.0;
  bool stopped_early = false;
  std::vector<std::size_t> constraint_violations;  // per epoch, after projection
};

struct TrainHooks {
  /// Replaces the validation CRPS computation; receives the 1-based epoch
  /// (0 for the initial evaluation).
  std::function<double(Model&, int)> validation_score;
  /// Called after each epoch's validation, before early-stopping bookkeeping.
  std::function<void(Model&, const EpochLog&)> on_epoch_end;
  /// Line-delimited JSON log sink.
  std::ostream* log = nullptr;
};

/// Mean over samples of the summed pinball loss on `taus`, in scaled units.
double validation_crps(const Model& model, const SeriesDataset& ds, Split split,
                       std::span<const double> taus);

/// Minibatch training with Adam, constraint projection after every step,
/// scheduled learning rate, early stopping and best-epoch restoration.
///
/// SQR heads draw tau ~ U(0,1) per minibatch (or per sample) and minimise the
/// pinball loss; the QR head minimises the pinball loss summed over its fixed
/// levels; the point head minimises the absolute error.
TrainResult train(Model& model, const SeriesDataset& ds, const TrainConfig& config,
                  const TrainHooks& hooks = {});

}  // namespace sqrdln
