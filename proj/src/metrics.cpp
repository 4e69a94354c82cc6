#include "sqrdln/metrics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sqrdln/loss.hpp"

namespace sqrdln {

namespace {

std::size_t sample_count(std::span<const double> y, std::size_t horizon) {
  if (horizon == 0 || y.size() % horizon != 0) {
    throw std::invalid_argument("metrics: observation count is not a multiple of the horizon");
  }
  return y.size() / horizon;
}

std::size_t check_forecasts(std::span<const double> y, std::span<const double> forecasts,
                            std::span<const double> taus, std::size_t horizon) {
  const std::size_t n = sample_count(y, horizon);
  if (taus.empty()) throw std::invalid_argument("metrics: empty quantile grid");
  if (forecasts.size() != n * taus.size() * horizon) {
    throw std::invalid_argument("metrics: forecast array does not match N x Q x h");
  }
  return n;
}

}  // namespace

PointMetrics point_metrics(std::span<const double> y, std::span<const double> y_hat,
                           std::size_t horizon) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("point_metrics: shape mismatch");
  const std::size_t n = sample_count(y, horizon);
  if (n == 0) throw std::invalid_argument("point_metrics: no samples");
  PointMetrics out;
  for (std::size_t j = 0; j < horizon; ++j) {
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i * horizon + j] - y_hat[i * horizon + j];
      abs_sum += std::abs(e);
      sq_sum += e * e;
    }
    out.mae += abs_sum / static_cast<double>(n);
    out.rmse += std::sqrt(sq_sum / static_cast<double>(n));
  }
  out.mae /= static_cast<double>(horizon);
  out.rmse /= static_cast<double>(horizon);
  return out;
}

double mean_squared_error(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size() || y.empty()) throw std::invalid_argument("mse: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  return s / static_cast<double>(y.size());
}

double skill_score(double mse_f, double mse_p) {
  if (!(mse_p > 0.0)) throw std::domain_error("skill_score: reference MSE must be positive");
  return 1.0 - mse_f / mse_p;
}

double crps_approx(std::span<const double> y, std::span<const double> forecasts,
                   std::span<const double> taus, std::size_t horizon) {
  const std::size_t n = check_forecasts(y, forecasts, taus, horizon);
  const std::size_t q = taus.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < q; ++k) {
      const double* f = forecasts.data() + (i * q + k) * horizon;
      for (std::size_t j = 0; j < horizon; ++j) total += pinball(y[i * horizon + j], f[j], taus[k]);
    }
  }
  return total / static_cast<double>(n * horizon);
}

Curve picp(std::span<const double> y, std::span<const double> forecasts,
           std::span<const double> taus, std::size_t horizon) {
  const std::size_t n = check_forecasts(y, forecasts, taus, horizon);
  const std::size_t q = taus.size();
  for (std::size_t k = 0; k < q; ++k) {
    if (std::abs(taus[k] + taus[q - 1 - k] - 1.0) > 1e-9) {
      throw std::invalid_argument("picp: quantile grid is not symmetric about 0.5");
    }
  }
  Curve curve;
  // Innermost interval first so the curve is ordered by nominal coverage.
  for (std::size_t k = q / 2; k-- > 0;) {
    const std::size_t hi = q - 1 - k;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* lo_row = forecasts.data() + (i * q + k) * horizon;
      const double* hi_row = forecasts.data() + (i * q + hi) * horizon;
      for (std::size_t j = 0; j < horizon; ++j) {
        const double v = y[i * horizon + j];
        if (v >= lo_row[j] && v <= hi_row[j]) ++inside;
      }
    }
    curve.emplace_back(taus[hi] - taus[k],
                       static_cast<double>(inside) / static_cast<double>(n * horizon));
  }
  return curve;
}

double ace(const Curve& picp_curve) {
  if (picp_curve.empty()) throw std::invalid_argument("ace: empty curve");
  double total = 0.0;
  for (const auto& [nominal, empirical] : picp_curve) total += std::abs(nominal - empirical);
  return total / static_cast<double>(picp_curve.size());
}

Curve reliability(std::span<const double> y, std::span<const double> forecasts,
                  std::span<const double> taus, std::size_t horizon) {
  const std::size_t n = check_forecasts(y, forecasts, taus, horizon);
  const std::size_t q = taus.size();
  Curve curve;
  for (std::size_t k = 0; k < q; ++k) {
    std::size_t below = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = forecasts.data() + (i * q + k) * horizon;
      for (std::size_t j = 0; j < horizon; ++j) {
        if (y[i * horizon + j] <= row[j]) ++below;
      }
    }
    curve.emplace_back(taus[k], static_cast<double>(below) / static_cast<double>(n * horizon));
  }
  return curve;
}

namespace {

nlohmann::json curve_json(const Curve& curve) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [nominal, empirical] : curve) arr.push_back({{"nominal", nominal}, {"empirical", empirical}});
  return arr;
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const MetricReport& r) {
  return {{"mae", r.mae},
          {"rmse", r.rmse},
          {"ss", optional_json(r.ss)},
          {"crps", optional_json(r.crps)},
          {"ace", optional_json(r.ace)},
          {"picp", curve_json(r.picp_curve)},
          {"reliability", curve_json(r.reliability_curve)},
          {"crossover_rate", r.crossover_rate},
          {"samples", r.samples},
          {"horizon", r.horizon}};
}

nlohmann::json metric_report_schema() {
  const nlohmann::json number_or_null = {{"type", nlohmann::json::array({"number", "null"})}};
  const nlohmann::json curve = {
      {"type", "array"},
      {"items",
       {{"type", "object"},
        {"required", {"nominal", "empirical"}},
        {"additionalProperties", false},
        {"properties",
         {{"nominal", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}},
          {"empirical", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}}}}}}};
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"title", "MetricReport"},
          {"type", "object"},
          {"additionalProperties", false},
          {"required",
           {"mae", "rmse", "ss", "crps", "ace", "picp", "reliability", "crossover_rate", "samples",
            "horizon"}},
          {"properties",
           {{"mae", {{"type", "number"}, {"minimum", 0}}},
            {"rmse", {{"type", "number"}, {"minimum", 0}}},
            {"ss", number_or_null},
            {"crps", number_or_null},
            {"ace", number_or_null},
            {"picp", curve},
            {"reliability", curve},
            {"crossover_rate", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}},
            {"samples", {{"type", "integer"}, {"minimum", 0}}},
            {"horizon", {{"type", "integer"}, {"minimum", 1}}}}}};
}

void write_curve_csv(const std::filesystem::path& path, const Curve& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "nominal,empirical\n";
  out.precision(17);
  for (const auto& [nominal, empirical] : curve) out << nominal << ',' << empirical << '\n';
}

}  // namespace sqrdln
