#pragma once

#include <cstdint>
#include <string>

#include "sqrdln/dataset.hpp"

namespace sqrdln {

enum class SynthKind { HeteroscedasticSine, ClearSkyRamp };

std::string to_string(SynthKind kind);
SynthKind synth_kind_from_string(const std::string& name);

/// Generating process of the heteroscedastic sine series:
///   s(hour) = max(0, sin(2 pi (hour - 6) / 24))
///   y = max(0, 0.2 + 0.8 s + (0.05 + 0.25 s) * eps),  eps ~ N(0, 1) iid.
/// The baseline and noise floor keep night values continuous.
struct SineProcess {
  static constexpr double kBase = 0.2;
  static constexpr double kAmplitude = 0.8;
  static constexpr double kNoiseFloor = 0.05;
  static constexpr double kNoiseSlope = 0.25;

  static double diurnal(double hour);
  static double mean(double hour);
  static double stddev(double hour);
  /// Exact conditional quantile of y given the hour of day.
  static double quantile(double hour, double tau);
};

/// Generating process of the clear-sky ramp series. Column "clear_sky" is a
/// deterministic clear-sky curve o(t); column "target" is o(t) * r(t) with a
/// daily AR(1) clearness index plus hourly noise.
struct ClearSkyProcess {
  static constexpr double kPeak = 800.0;
  static constexpr double kMeanClearness = 0.6;
  static constexpr double kPersistence = 0.5;
  static constexpr double kDailyNoise = 0.15;
  static constexpr double kHourlyNoise = 0.05;

  static double clear_sky(HourStamp stamp);
};

/// Hourly synthetic series of `length` rows starting 2020-01-01T00:00.
/// heteroscedastic-sine has the single column "target"; clear-sky-ramp has
/// "target" and "clear_sky".
RawSeries synth_series(SynthKind kind, std::size_t length, std::uint64_t seed);

/// synth_series wrapped into a dataset; for clear-sky-ramp the config's
/// clear-sky column defaults to "clear_sky".
SeriesDataset synth_generate(SynthKind kind, std::size_t length, std::uint64_t seed,
                             DataConfig config = {});

}  // namespace sqrdln
