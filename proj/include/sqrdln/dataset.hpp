#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqrdln/rng.hpp"

namespace sqrdln {

/// Hours since 1970-01-01T00:00 (naive, no time zone).
using HourStamp = std::int64_t;

HourStamp parse_timestamp(const std::string& text);
std::string format_timestamp(HourStamp stamp);

/// Unscaled table: one row per hour, one column per feature.
struct RawSeries {
  std::vector<HourStamp> timestamps;
  std::vector<std::string> columns;
  std::vector<double> values;  // [rows][columns]

  std::size_t rows() const { return timestamps.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * columns.size() + col]; }
};

/// Reads a CSV with a header row, ISO-8601 timestamps in the first column and
/// numeric features in the rest. Empty / NaN / NA cells become 0. Throws
/// std::invalid_argument on duplicate or non-hourly timestamps and on
/// non-numeric cells.
RawSeries read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const RawSeries& series);

enum class Split { Train, Validation, Test };
std::string to_string(Split split);
Split split_from_string(const std::string& name);

struct DataConfig {
  std::string target = "target";
  std::optional<std::string> clear_sky;
  std::size_t window = 96;
  std::size_t horizon = 36;
  double train_fraction = 0.6;
  double validation_fraction = 0.2;
  bool time_features = true;

  void validate() const;
};

struct ScaleParams {
  double min = 0.0;
  double max = 1.0;

  double scale(double v) const { return max > min ? (v - min) / (max - min) : 0.0; }
  double unscale(double v) const { return min + v * (max - min); }
};

/// Min-max scaled multivariate hourly series with chronological
/// train / validation / test blocks. Scaling is fit on the training rows.
class SeriesDataset {
 public:
  SeriesDataset(RawSeries raw, const DataConfig& config);

  std::size_t rows() const { return timestamps_.size(); }
  std::size_t feature_count() const { return columns_.size(); }
  std::size_t window() const { return window_; }
  std::size_t horizon() const { return horizon_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<HourStamp>& timestamps() const { return timestamps_; }
  std::size_t target_column() const { return target_column_; }
  std::optional<std::size_t> clear_sky_column() const { return clear_sky_column_; }
  const std::vector<ScaleParams>& scale_params() const { return scale_; }

  double value(std::size_t row, std::size_t col) const { return scaled_[row * columns_.size() + col]; }
  double raw_value(std::size_t row, std::size_t col) const { return raw_[row * columns_.size() + col]; }

  /// Row range [begin, end) of a split.
  std::pair<std::size_t, std::size_t> split_rows(Split split) const;
  /// Windows that fit entirely inside the split: length - w - h + 1 (or 0).
  std::size_t sample_count(Split split) const;
  /// First row of the i-th window of a split.
  std::size_t sample_start(Split split, std::size_t i) const;

  /// w x F scaled window starting at `start` (row-major).
  std::span<const double> window_at(std::size_t start) const;
  /// h scaled target values following the window starting at `start`.
  std::vector<double> target_at(std::size_t start) const;
  /// Same in physical units.
  std::vector<double> raw_target_at(std::size_t start) const;

  /// Appends sin/cos pairs for hour of day (24), day of week (7) and week of
  /// year (52), scaled with training-split min-max like every other column.
  void add_time_features();

  /// Affine inverse of the target column's scaling.
  double inverse_scale(double scaled) const { return scale_[target_column_].unscale(scaled); }
  std::vector<double> inverse_scale(std::span<const double> scaled) const;

  /// Scales a raw w x F window with the stored parameters.
  std::vector<double> scale_window(std::span<const double> raw) const;

 private:
  void fit_and_scale(std::size_t first_col);

  std::vector<HourStamp> timestamps_;
  std::vector<std::string> columns_;
  std::vector<double> raw_;
  std::vector<double> scaled_;
  std::vector<ScaleParams> scale_;
  std::size_t target_column_ = 0;
  std::optional<std::size_t> clear_sky_column_;
  std::size_t window_;
  std::size_t horizon_;
  std::size_t train_end_ = 0;
  std::size_t validation_end_ = 0;
};

SeriesDataset load_csv(const std::filesystem::path& path, const DataConfig& config);

/// Circular encodings (sin, cos) of hour-of-day, day-of-week, week-of-year.
std::array<double, 6> time_features(HourStamp stamp);

/// Sample starts of a split cut into minibatches. The training split is
/// shuffled with `rng` when given; other splits keep chronological order.
std::vector<std::vector<std::size_t>> window_batches(const SeriesDataset& ds, Split split,
                                                     std::size_t batch_size,
                                                     SeededRng* rng = nullptr);

}  // namespace sqrdln
