#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqrdln/config.hpp"
#include "sqrdln/evaluation.hpp"
#include "sqrdln/forecast.hpp"
#include "sqrdln/trainer.hpp"

namespace sqrdln {

/// Exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitNumeric = 3 };

/// Model label used in experiment tables ("LSTM-DLN", "SP", ...).
std::string model_label(HeadKind kind);

/// Data-handling facts a checkpoint needs to forecast from raw input rows.
nlohmann::json data_manifest(const SeriesDataset& ds, const DataConfig& config);

struct TrainOutcome {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  TrainResult result;
};

/// Trains `config.head` with `config.seed`; writes model.ckpt and train_log.jsonl
/// into `out_dir`.
TrainOutcome cmd_train(const RunConfig& config, const std::filesystem::path& out_dir,
                       const TrainHooks& hooks = {});

/// Scores a checkpoint on one split; writes report.json, picp.csv and
/// reliability.csv into `out_dir`.
Evaluation cmd_eval(const std::filesystem::path& checkpoint, const RunConfig& config,
                    Split split, const std::vector<double>& taus,
                    const std::filesystem::path& out_dir);

struct MetricSummary {
  std::optional<double> mean;
  std::optional<double> stddev;  // population standard deviation over seeds
};

struct ExperimentRow {
  std::string model;
  std::string head;  // empty for SP
  MetricSummary crps, mae, rmse, ace, ss;
  std::size_t runs = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<std::string> failures;
  int exit_code = kExitOk;
};

/// Mean and population standard deviation; empty when `values` is empty.
MetricSummary summarize(const std::vector<double>& values);

std::vector<std::string> experiment_columns();

/// Trains and evaluates every configured head for every seed; writes
/// experiment.csv and runs.jsonl into `out_dir`.
ExperimentResult cmd_experiment(const RunConfig& config, const std::vector<std::uint64_t>& seeds,
                                const std::filesystem::path& out_dir);

struct TuneTrial {
  nlohmann::json params;  // dotted key -> value
  std::size_t parameter_count = 0;
  bool skipped = false;
  std::string reason;
  double validation_crps = 0.0;
  double validation_ace = 0.0;
  int rank = 0;  // 1-based among completed trials, 0 when skipped
};

/// Orders completed trials by validation CRPS, then ACE, then parameters;
/// skipped trials go last.
void rank_trials(std::vector<TuneTrial>& trials);

/// Grid search over `config.tune.grid`; writes tune_trials.csv into `out_dir`.
std::vector<TuneTrial> cmd_tune(const RunConfig& config, const std::filesystem::path& out_dir);

/// Forecasts from the last `window` rows of a raw CSV; writes one row per
/// horizon step with one column per tau.
ForecastBatch cmd_forecast(const std::filesystem::path& checkpoint,
                           const std::filesystem::path& window_csv,
                           const std::vector<double>& taus, std::ostream& out);

/// Times exploitation of a checkpoint; returns the JSON report.
nlohmann::json cmd_bench(const std::filesystem::path& checkpoint, std::size_t repeats,
                         const std::vector<double>& taus);

void write_forecast_csv(std::ostream& out, const ForecastBatch& batch);

}  // namespace sqrdln
