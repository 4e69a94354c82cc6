#pragma once

#include <span>
#include <vector>

#include "sqrdln/model.hpp"

namespace sqrdln {

/// Quantile forecasts for one origin: row k holds the h-step forecast at taus[k].
struct ForecastBatch {
  std::vector<double> taus;
  std::vector<double> values;  // [Q][h]
  std::size_t horizon = 0;
  std::size_t origin = 0;

  std::size_t quantiles() const { return taus.size(); }
  double at(std::size_t k, std::size_t j) const { return values[k * horizon + j]; }
  std::span<const double> row(std::size_t k) const { return {values.data() + k * horizon, horizon}; }
};

/// One embedding pass, then one head pass per quantile level.
///
/// SQR heads are evaluated at every requested level. The fixed-quantile QR
/// head only answers its own grid (other levels are rejected). The point head
/// repeats its single forecast on every row. Throws on an empty or unsorted
/// level set.
ForecastBatch exploit(const Model& model, std::span<const double> window,
                      std::span<const double> taus, std::size_t origin = 0);

/// Fraction of (adjacent level pair, horizon step) cells where the higher
/// level's forecast is below the lower one by more than 1e-12.
double crossover_rate(const ForecastBatch& batch);
/// Pooled rate over many batches.
double crossover_rate(std::span<const ForecastBatch> batches);

/// Smart persistence: step j (1-based) of the horizon is predicted from the
/// observation at the same time of day on the previous day, scaled by the
/// clear-sky ratio: x(t) / o(t) * o(t + j), with the ratio 0 when o(t) = 0.
///
/// `observed` and `clear_sky_past` hold at least the last 24 hourly values,
/// oldest first; `clear_sky_future` holds the clear-sky curve for the
/// horizon. Steps 1..24 use the previous 24 hours in order, steps 25..36 use
/// the first 12 of them again, and so on with period 24.
std::vector<double> smart_persistence(std::span<const double> observed,
                                      std::span<const double> clear_sky_past,
                                      std::span<const double> clear_sky_future);

struct TimingReport {
  double mean_seconds = 0.0;
  double variance_seconds = 0.0;
  std::size_t repeats = 0;
  std::size_t parameter_count = 0;
};

/// Wall-clock statistics of full exploit passes (population variance).
TimingReport timing_probe(Model& model, std::span<const double> window,
                          std::span<const double> taus, std::size_t repeats);

}  // namespace sqrdln
