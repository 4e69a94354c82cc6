#include "sqrdln/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqrdln {

std::vector<double> persistence_forecast(const SeriesDataset& ds, std::size_t start) {
  const auto cs = ds.clear_sky_column();
  if (!cs) throw std::invalid_argument("smart persistence needs a clear-sky column");
  const std::size_t w = ds.window();
  const std::size_t h = ds.horizon();
  if (w < 24) throw std::invalid_argument("smart persistence needs a window of at least 24 hours");
  std::vector<double> observed(24), past(24), future(h);
  for (std::size_t i = 0; i < 24; ++i) {
    const std::size_t row = start + w - 24 + i;
    observed[i] = ds.raw_value(row, ds.target_column());
    past[i] = ds.raw_value(row, *cs);
  }
  for (std::size_t j = 0; j < h; ++j) future[j] = ds.raw_value(start + w + j, *cs);
  return smart_persistence(observed, past, future);
}

PersistenceScore persistence_score(const SeriesDataset& ds, Split split) {
  const std::size_t n = ds.sample_count(split);
  if (n == 0) throw std::invalid_argument(to_string(split) + " split has no samples");
  std::vector<double> y, f;
  y.reserve(n * ds.horizon());
  f.reserve(n * ds.horizon());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = ds.sample_start(split, i);
    const auto yi = ds.raw_target_at(start);
    const auto fi = persistence_forecast(ds, start);
    y.insert(y.end(), yi.begin(), yi.end());
    f.insert(f.end(), fi.begin(), fi.end());
  }
  return {point_metrics(y, f, ds.horizon()), mean_squared_error(y, f)};
}

Evaluation evaluate(const Model& model, const SeriesDataset& ds, Split split,
                    std::span<const double> taus) {
  const std::size_t n = ds.sample_count(split);
  if (n == 0) throw std::invalid_argument(to_string(split) + " split has no samples");
  const std::size_t h = ds.horizon();
  const std::size_t q = taus.size();
  const auto median_it = std::find_if(taus.begin(), taus.end(),
                                      [](double t) { return std::abs(t - 0.5) < 1e-12; });
  const bool has_median = median_it != taus.end();
  const std::size_t median_row = static_cast<std::size_t>(median_it - taus.begin());
  const double half[] = {0.5};

  Evaluation ev;
  std::vector<double> y, all, median, scaled_values;
  y.reserve(n * h);
  all.reserve(n * q * h);
  median.reserve(n * h);
  std::vector<ForecastBatch> scaled;
  scaled.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = ds.sample_start(split, i);
    const auto window = ds.window_at(start);
    auto batch = exploit(model, window, taus, start);
    scaled.push_back(batch);
    const auto yi = ds.raw_target_at(start);
    y.insert(y.end(), yi.begin(), yi.end());
    batch.values = ds.inverse_scale(batch.values);
    all.insert(all.end(), batch.values.begin(), batch.values.end());
    if (has_median) {
      const auto row = batch.row(median_row);
      median.insert(median.end(), row.begin(), row.end());
    } else {
      const auto m = ds.inverse_scale(exploit(model, window, half, start).values);
      median.insert(median.end(), m.begin(), m.end());
    }
    ev.forecasts.push_back(std::move(batch));
  }

  MetricReport& r = ev.report;
  r.samples = n;
  r.horizon = h;
  const auto pm = point_metrics(y, median, h);
  r.mae = pm.mae;
  r.rmse = pm.rmse;
  r.crossover_rate = crossover_rate(std::span<const ForecastBatch>(scaled));

  if (model.head().kind() == HeadKind::Point) {
    ev.warnings.push_back("point head: CRPS, ACE and calibration curves are not defined");
  } else {
    r.crps = crps_approx(y, all, taus, h);
    r.reliability_curve = reliability(y, all, taus, h);
    if (q >= 2) {
      try {
        r.picp_curve = picp(y, all, taus, h);
        r.ace = ace(r.picp_curve);
      } catch (const std::invalid_argument& e) {
        ev.warnings.push_back(std::string("ACE skipped: ") + e.what());
      }
    }
  }

  if (ds.clear_sky_column() && ds.window() >= 24) {
    const auto sp = persistence_score(ds, split);
    try {
      r.ss = skill_score(mean_squared_error(y, median), sp.mse);
    } catch (const std::domain_error& e) {
      ev.warnings.push_back(std::string("skill score skipped: ") + e.what());
    }
  } else {
    ev.warnings.push_back("skill score skipped: no clear-sky column or window shorter than 24");
  }
  return ev;
}

}  // namespace sqrdln
