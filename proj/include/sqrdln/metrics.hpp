#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace sqrdln {

// Layout conventions: observations are N x h row-major; quantile forecasts
// are N x Q x h row-major (sample, quantile level, horizon step). Every
// metric is averaged over the horizon.

struct PointMetrics {
  double mae = 0.0;
  double rmse = 0.0;
};

/// Per-step MAE and RMSE over the N samples, then averaged over the h steps.
PointMetrics point_metrics(std::span<const double> y, std::span<const double> y_hat,
                           std::size_t horizon);

double mean_squared_error(std::span<const double> y, std::span<const double> y_hat);

/// 1 - mse_f / mse_p. Throws std::domain_error when mse_p is not positive.
double skill_score(double mse_f, double mse_p);

/// Sum of pinball losses over the quantile levels, averaged over samples
/// and horizon steps.
double crps_approx(std::span<const double> y, std::span<const double> forecasts,
                   std::span<const double> taus, std::size_t horizon);

/// (nominal level, empirical frequency) pairs ordered by nominal level.
using Curve = std::vector<std::pair<double, double>>;

/// Coverage of the central intervals formed by opposing quantile levels
/// (tau, 1 - tau), closed at both ends. Throws when the grid is not symmetric
/// about 0.5.
Curve picp(std::span<const double> y, std::span<const double> forecasts,
           std::span<const double> taus, std::size_t horizon);

/// Mean absolute gap between nominal and empirical coverage.
double ace(const Curve& picp_curve);

/// Fraction of cells with y <= forecast, per quantile level.
Curve reliability(std::span<const double> y, std::span<const double> forecasts,
                  std::span<const double> taus, std::size_t horizon);

struct MetricReport {
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> ss;
  std::optional<double> crps;
  std::optional<double> ace;
  Curve picp_curve;
  Curve reliability_curve;
  double crossover_rate = 0.0;
  std::size_t samples = 0;
  std::size_t horizon = 0;
};

nlohmann::json to_json(const MetricReport& report);
/// JSON schema (draft 2020-12) describing to_json(MetricReport) output.
nlohmann::json metric_report_schema();
/// Two-column CSV "nominal,empirical".
void write_curve_csv(const std::filesystem::path& path, const Curve& curve);

}  // namespace sqrdln
