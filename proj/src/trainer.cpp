#include "sqrdln/trainer.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "sqrdln/forecast.hpp"
#include "sqrdln/loss.hpp"
#include "sqrdln/metrics.hpp"
#include "sqrdln/projection.hpp"

namespace sqrdln {

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("train config: epochs must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (!(scheduler.base_lr > 0.0)) throw std::invalid_argument("train config: learning rate must be positive");
  if (early_stopping_patience < 0) throw std::invalid_argument("train config: negative patience");
  if (validation_taus.empty()) throw std::invalid_argument("train config: empty validation quantiles");
}

TrainConfig default_train_config(HeadKind kind) {
  TrainConfig c;
  switch (kind) {
    case HeadKind::Mlp:
      c.epochs = 30;
      c.scheduler = Scheduler::step_on_increase(1e-3, 1, 0.1);
      break;
    case HeadKind::Point:
      c.epochs = 10;
      c.scheduler = Scheduler::step_at_epochs(1e-3, {1, 2, 3}, 0.1);
      c.scheduler.increase_patience = 1;
      c.scheduler.increase_factor = 0.1;
      break;
    case HeadKind::Linear:
      c.epochs = 20;
      c.scheduler = Scheduler::step_on_increase(1e-3, 2, 0.1);
      break;
    case HeadKind::ConstrainedLinear:
      c.epochs = 300;
      c.scheduler = Scheduler::step_at_epochs(0.1, {1, 2}, 0.01);
      c.scheduler.increase_patience = 1;
      c.scheduler.increase_factor = 0.1;
      break;
    case HeadKind::FixedQuantileQr:
      c.epochs = 250;
      c.scheduler = Scheduler::step_at_epochs(1e-3, {1, 2, 3}, 0.1);
      c.scheduler.increase_patience = 1;
      c.scheduler.increase_factor = 0.1;
      break;
    case HeadKind::Dln:
      c.epochs = 10;
      c.scheduler = Scheduler::step_at_epochs(1e-3, {1, 2, 3, 4}, 0.5);
      break;
  }
  return c;
}

double validation_crps(const Model& model, const SeriesDataset& ds, Split split,
                       std::span<const double> taus) {
  const std::size_t n = ds.sample_count(split);
  if (n == 0) throw std::invalid_argument(to_string(split) + " split has no samples");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = ds.sample_start(split, i);
    const auto batch = exploit(model, ds.window_at(start), taus, start);
    const auto y = ds.target_at(start);
    total += crps_approx(y, batch.values, taus, ds.horizon());
  }
  return total / static_cast<double>(n);
}

namespace {

std::size_t count_violations(const ParameterList& params) {
  std::size_t bad = 0;
  for (const auto* p : params) {
    if (!satisfies_constraint(*p, 1e-9)) ++bad;
  }
  return bad;
}

// Loss of one sample and its gradient with respect to the head output,
// already divided by `scale`.
double sample_loss(HeadKind kind, const std::vector<double>& y, const std::vector<double>& out,
                   double tau, const std::vector<double>& qr_taus, double scale,
                   std::vector<double>& dout) {
  const std::size_t h = y.size();
  dout.assign(out.size(), 0.0);
  double loss = 0.0;
  if (kind == HeadKind::Point) {
    for (std::size_t j = 0; j < h; ++j) {
      const double e = out[j] - y[j];
      loss += std::abs(e);
      dout[j] = (e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0)) * scale;
    }
  } else if (kind == HeadKind::FixedQuantileQr) {
    for (std::size_t k = 0; k < qr_taus.size(); ++k) {
      for (std::size_t j = 0; j < h; ++j) {
        const double f = out[k * h + j];
        loss += pinball(y[j], f, qr_taus[k]);
        dout[k * h + j] = pinball_grad(y[j], f, qr_taus[k]) * scale;
      }
    }
  } else {
    for (std::size_t j = 0; j < h; ++j) {
      loss += pinball(y[j], out[j], tau);
      dout[j] = pinball_grad(y[j], out[j], tau) * scale;
    }
  }
  return loss * scale;
}

}  // namespace

TrainResult train(Model& model, const SeriesDataset& ds, const TrainConfig& config,
                  const TrainHooks& hooks) {
  config.validate();
  if (model.config().lstm.window != ds.window() ||
      model.config().lstm.input_features != ds.feature_count() ||
      model.head().horizon() != ds.horizon()) {
    throw std::invalid_argument("train: model shape does not match the dataset");
  }
  const HeadKind kind = model.head().kind();
  std::vector<double> qr_taus;
  if (kind == HeadKind::FixedQuantileQr) qr_taus = static_cast<const DirectHead&>(model.head()).taus();

  const ParameterList params = model.parameters();
  Adam adam(config.adam);
  SeededRng root(config.seed);
  SeededRng shuffle_rng = root.fork(11);
  SeededRng tau_rng = root.fork(12);

  const auto score = [&](int epoch) {
    if (hooks.validation_score) return hooks.validation_score(model, epoch);
    return validation_crps(model, ds, Split::Validation, config.validation_taus);
  };

  TrainResult result;
  if (config.epochs == 0) return result;
  result.initial_validation_crps = score(0);
  result.best_validation_crps = std::numeric_limits<double>::infinity();

  std::vector<double> history;
  std::vector<std::vector<double>> best_snapshot;
  int since_best = 0;
  LstmTape lstm_tape;
  HeadTape head_tape;
  std::vector<double> dout;
  std::vector<double> dembedding(model.head().embedding_size());

  for (int e = 0; e < config.epochs; ++e) {
    const double lr = schedule_lr(config.scheduler, e, history);
    adam.set_learning_rate(lr);
    double epoch_loss = 0.0;
    std::size_t epoch_samples = 0;
    for (const auto& batch : window_batches(ds, Split::Train, config.batch_size, &shuffle_rng)) {
      zero_grads(params);
      const double batch_tau = tau_rng.uniform();
      const double scale = 1.0 / static_cast<double>(batch.size() * ds.horizon());
      double batch_loss = 0.0;
      for (std::size_t start : batch) {
        const double tau =
            config.tau_sampling == TauSampling::PerSample ? tau_rng.uniform() : batch_tau;
        const auto embedding = model.embed(ds.window_at(start), &lstm_tape);
        const auto out = model.head().forward(embedding, tau, &head_tape);
        const auto y = ds.target_at(start);
        batch_loss += sample_loss(kind, y, out, tau, qr_taus, scale, dout);
        std::fill(dembedding.begin(), dembedding.end(), 0.0);
        model.head().backward(head_tape, dout, dembedding);
        model.embedding().backward(lstm_tape, dembedding);
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite training loss in epoch " + std::to_string(e + 1));
      }
      for (const auto* p : params) {
        for (double g : p->grad()) {
          if (!std::isfinite(g)) {
            throw NumericError("non-finite gradient in block '" + p->name() + "' in epoch " +
                               std::to_string(e + 1));
          }
        }
      }
      adam.step(params);
      apply_constraints(params);
      epoch_loss += batch_loss * static_cast<double>(batch.size());
      epoch_samples += batch.size();
    }

    EpochLog log;
    log.epoch = e + 1;
    log.train_loss = epoch_loss / static_cast<double>(epoch_samples);
    log.validation_crps = score(e + 1);
    log.learning_rate = lr;
    if (!std::isfinite(log.validation_crps)) {
      throw NumericError("non-finite validation CRPS in epoch " + std::to_string(e + 1));
    }
    result.epochs.push_back(log);
    result.constraint_violations.push_back(count_violations(params));
    history.push_back(log.validation_crps);
    if (hooks.log) {
      *hooks.log << nlohmann::json{{"epoch", log.epoch},
                                   {"train_loss", log.train_loss},
                                   {"validation_crps", log.validation_crps},
                                   {"learning_rate", log.learning_rate}}
                        .dump()
                 << '\n';
    }
    if (hooks.on_epoch_end) hooks.on_epoch_end(model, log);

    if (log.validation_crps < result.best_validation_crps) {
      result.best_validation_crps = log.validation_crps;
      result.best_epoch = log.epoch;
      best_snapshot = model.snapshot();
      since_best = 0;
    } else if (config.early_stopping_patience > 0 &&
               ++since_best >= config.early_stopping_patience) {
      result.stopped_early = e + 1 < config.epochs;
      break;
    }
  }
  if (!best_snapshot.empty()) model.restore(best_snapshot);
  return result;
}

}  // namespace sqrdln
