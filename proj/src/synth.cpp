#include "sqrdln/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "sqrdln/rng.hpp"

namespace sqrdln {

namespace {

constexpr HourStamp kStart = 438288;  // 2020-01-01T00:00

double hour_of_day(HourStamp stamp) {
  return static_cast<double>(((stamp % 24) + 24) % 24);
}

}  // namespace

std::string to_string(SynthKind kind) {
  return kind == SynthKind::HeteroscedasticSine ? "heteroscedastic-sine" : "clear-sky-ramp";
}

SynthKind synth_kind_from_string(const std::string& name) {
  if (name == "heteroscedastic-sine") return SynthKind::HeteroscedasticSine;
  if (name == "clear-sky-ramp") return SynthKind::ClearSkyRamp;
  throw std::invalid_argument("unknown synthetic kind '" + name + "'");
}

double SineProcess::diurnal(double hour) {
  return std::max(0.0, std::sin(2.0 * std::numbers::pi * (hour - 6.0) / 24.0));
}

double SineProcess::mean(double hour) { return kBase + kAmplitude * diurnal(hour); }

double SineProcess::stddev(double hour) { return kNoiseFloor + kNoiseSlope * diurnal(hour); }

double SineProcess::quantile(double hour, double tau) {
  const boost::math::normal_distribution<double> standard(0.0, 1.0);
  const double z = boost::math::quantile(standard, tau);
  return std::max(0.0, mean(hour) + stddev(hour) * z);
}

double ClearSkyProcess::clear_sky(HourStamp stamp) {
  const double hour = hour_of_day(stamp);
  const double day = std::floor(static_cast<double>(stamp) / 24.0);
  const double season =
      0.85 + 0.15 * std::cos(2.0 * std::numbers::pi * (std::fmod(day, 365.0) - 172.0) / 365.0);
  return kPeak * SineProcess::diurnal(hour) * season;
}

RawSeries synth_series(SynthKind kind, std::size_t length, std::uint64_t seed) {
  if (length < 48) throw std::invalid_argument("synthetic series needs at least 48 rows");
  SeededRng rng(seed);
  RawSeries out;
  out.timestamps.resize(length);
  for (std::size_t i = 0; i < length; ++i) out.timestamps[i] = kStart + static_cast<HourStamp>(i);

  if (kind == SynthKind::HeteroscedasticSine) {
    out.columns = {"target"};
    out.values.resize(length);
    for (std::size_t i = 0; i < length; ++i) {
      const double hour = hour_of_day(out.timestamps[i]);
      const double y = SineProcess::mean(hour) + SineProcess::stddev(hour) * rng.normal();
      out.values[i] = std::max(0.0, y);
    }
    return out;
  }

  out.columns = {"target", "clear_sky"};
  out.values.resize(2 * length);
  double clearness = ClearSkyProcess::kMeanClearness;
  for (std::size_t i = 0; i < length; ++i) {
    const HourStamp stamp = out.timestamps[i];
    if (i == 0 || hour_of_day(stamp) == 0.0) {
      clearness = ClearSkyProcess::kMeanClearness +
                  ClearSkyProcess::kPersistence * (clearness - ClearSkyProcess::kMeanClearness) +
                  ClearSkyProcess::kDailyNoise * rng.normal();
      clearness = std::clamp(clearness, 0.05, 1.0);
    }
    const double ratio =
        std::clamp(clearness + ClearSkyProcess::kHourlyNoise * rng.normal(), 0.0, 1.1);
    const double o = ClearSkyProcess::clear_sky(stamp);
    out.values[2 * i] = o * ratio;
    out.values[2 * i + 1] = o;
  }
  return out;
}

SeriesDataset synth_generate(SynthKind kind, std::size_t length, std::uint64_t seed,
                             DataConfig config) {
  if (kind == SynthKind::ClearSkyRamp && !config.clear_sky) config.clear_sky = "clear_sky";
  config.target = "target";
  if (length < config.window + config.horizon) {
    throw std::invalid_argument("synthetic series shorter than window + horizon");
  }
  return SeriesDataset(synth_series(kind, length, seed), config);
}

}  // namespace sqrdln
