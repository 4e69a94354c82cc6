#include "sqrdln/forecast.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sqrdln/heads.hpp"

namespace sqrdln {

ForecastBatch exploit(const Model& model, std::span<const double> window,
                      std::span<const double> taus, std::size_t origin) {
  if (taus.empty()) throw std::invalid_argument("exploit: empty quantile set");
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (!(taus[k] >= 0.0 && taus[k] <= 1.0) || (k > 0 && !(taus[k] > taus[k - 1]))) {
      throw std::invalid_argument("exploit: quantile levels must be strictly increasing in [0,1]");
    }
  }
  const Head& head = model.head();
  const std::size_t h = head.horizon();
  ForecastBatch batch;
  batch.taus.assign(taus.begin(), taus.end());
  batch.horizon = h;
  batch.origin = origin;
  batch.values.resize(taus.size() * h);

  const auto embedding = model.embed(window);
  switch (head.kind()) {
    case HeadKind::FixedQuantileQr: {
      const auto& grid = static_cast<const DirectHead&>(head).taus();
      const auto out = head.forward(embedding, 0.5);
      for (std::size_t k = 0; k < taus.size(); ++k) {
        std::size_t match = grid.size();
        for (std::size_t g = 0; g < grid.size(); ++g) {
          if (std::abs(grid[g] - taus[k]) < 1e-12) match = g;
        }
        if (match == grid.size()) {
          throw std::invalid_argument("exploit: QR head has no output for tau " +
                                      std::to_string(taus[k]));
        }
        std::copy_n(out.begin() + static_cast<std::ptrdiff_t>(match * h), h,
                    batch.values.begin() + static_cast<std::ptrdiff_t>(k * h));
      }
      break;
    }
    case HeadKind::Point: {
      const auto out = head.forward(embedding, 0.5);
      for (std::size_t k = 0; k < taus.size(); ++k) {
        std::copy(out.begin(), out.end(), batch.values.begin() + static_cast<std::ptrdiff_t>(k * h));
      }
      break;
    }
    default:
      for (std::size_t k = 0; k < taus.size(); ++k) {
        const auto out = head.forward(embedding, taus[k]);
        std::copy(out.begin(), out.end(), batch.values.begin() + static_cast<std::ptrdiff_t>(k * h));
      }
  }
  return batch;
}

namespace {

std::pair<std::size_t, std::size_t> count_crossovers(const ForecastBatch& b) {
  std::size_t bad = 0;
  std::size_t pairs = 0;
  for (std::size_t k = 0; k + 1 < b.quantiles(); ++k) {
    for (std::size_t j = 0; j < b.horizon; ++j) {
      ++pairs;
      if (b.at(k + 1, j) < b.at(k, j) - 1e-12) ++bad;
    }
  }
  return {bad, pairs};
}

}  // namespace

double crossover_rate(const ForecastBatch& batch) {
  const auto [bad, pairs] = count_crossovers(batch);
  return pairs ? static_cast<double>(bad) / static_cast<double>(pairs) : 0.0;
}

double crossover_rate(std::span<const ForecastBatch> batches) {
  std::size_t bad = 0;
  std::size_t pairs = 0;
  for (const auto& b : batches) {
    const auto [x, n] = count_crossovers(b);
    bad += x;
    pairs += n;
  }
  return pairs ? static_cast<double>(bad) / static_cast<double>(pairs) : 0.0;
}

std::vector<double> smart_persistence(std::span<const double> observed,
                                      std::span<const double> clear_sky_past,
                                      std::span<const double> clear_sky_future) {
  constexpr std::size_t kDay = 24;
  if (observed.size() < kDay || clear_sky_past.size() < kDay) {
    throw std::invalid_argument("smart_persistence: needs at least 24 past values");
  }
  if (observed.size() != clear_sky_past.size()) {
    throw std::invalid_argument("smart_persistence: observed and clear-sky history lengths differ");
  }
  const std::size_t day_start = observed.size() - kDay;
  std::vector<double> out(clear_sky_future.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::size_t src = day_start + j % kDay;
    const double o = clear_sky_past[src];
    const double ratio = o != 0.0 ? observed[src] / o : 0.0;
    out[j] = ratio * clear_sky_future[j];
  }
  return out;
}

TimingReport timing_probe(Model& model, std::span<const double> window,
                          std::span<const double> taus, std::size_t repeats) {
  TimingReport report;
  report.parameter_count = model.parameter_count();
  report.repeats = repeats;
  if (repeats == 0) return report;
  std::vector<double> seconds;
  seconds.reserve(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto batch = exploit(model, window, taus);
    const auto t1 = std::chrono::steady_clock::now();
    (void)batch;
    seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  double mean = 0.0;
  for (double s : seconds) mean += s;
  mean /= static_cast<double>(repeats);
  double var = 0.0;
  for (double s : seconds) var += (s - mean) * (s - mean);
  report.mean_seconds = mean;
  report.variance_seconds = var / static_cast<double>(repeats);
  return report;
}

}  // namespace sqrdln
