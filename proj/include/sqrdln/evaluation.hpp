#pragma once

#include <span>
#include <string>
#include <vector>

#include "sqrdln/dataset.hpp"
#include "sqrdln/forecast.hpp"
#include "sqrdln/metrics.hpp"
#include "sqrdln/model.hpp"

namespace sqrdln {

struct Evaluation {
  MetricReport report;
  /// Forecasts in physical units, one batch per sample.
  std::vector<ForecastBatch> forecasts;
  std::vector<std::string> warnings;
};

/// Forecasts every sample of `split` at `taus` and scores them in the
/// target's physical units. The point metrics use the 0.5 row (queried
/// separately when `taus` lacks it). Distributional metrics are skipped for
/// the point head; the skill score needs a clear-sky column.
Evaluation evaluate(const Model& model, const SeriesDataset& ds, Split split,
                    std::span<const double> taus);

/// Smart-persistence point metrics and MSE over `split`.
struct PersistenceScore {
  PointMetrics point;
  double mse = 0.0;
};
PersistenceScore persistence_score(const SeriesDataset& ds, Split split);

/// Smart-persistence forecast for the sample starting at `start`, in physical units.
std::vector<double> persistence_forecast(const SeriesDataset& ds, std::size_t start);

}  // namespace sqrdln
