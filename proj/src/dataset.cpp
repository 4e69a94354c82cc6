#include "sqrdln/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sqrdln {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int parse_int(const std::string& text, std::size_t pos, std::size_t len, const std::string& whole) {
  int v = 0;
  const char* first = text.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + len, v);
  if (ec != std::errc() || ptr != first + len) {
    throw std::invalid_argument("malformed timestamp '" + whole + "'");
  }
  return v;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NaN" || cell == "nan" || cell == "NA" || cell == "null";
}

double parse_number(const std::string& cell, std::size_t line_no, const std::string& column) {
  if (is_missing(cell)) return 0.0;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw std::invalid_argument("non-numeric value '" + cell + "' in column '" + column +
                                "' on line " + std::to_string(line_no));
  }
  return v;
}

}  // namespace

HourStamp parse_timestamp(const std::string& raw) {
  std::string text = trim(raw);
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.pop_back();
  if (text.size() < 13 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ')) {
    throw std::invalid_argument("malformed timestamp '" + raw + "'");
  }
  const int y = parse_int(text, 0, 4, raw);
  const int mo = parse_int(text, 5, 2, raw);
  const int d = parse_int(text, 8, 2, raw);
  const int hh = parse_int(text, 11, 2, raw);
  int mm = 0;
  int ss = 0;
  if (text.size() >= 16) {
    if (text[13] != ':') throw std::invalid_argument("malformed timestamp '" + raw + "'");
    mm = parse_int(text, 14, 2, raw);
  }
  if (text.size() >= 19) {
    if (text[16] != ':') throw std::invalid_argument("malformed timestamp '" + raw + "'");
    ss = parse_int(text, 17, 2, raw);
  }
  if (text.size() != 13 && text.size() != 16 && text.size() != 19) {
    throw std::invalid_argument("malformed timestamp '" + raw + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
    throw std::invalid_argument("invalid date in timestamp '" + raw + "'");
  }
  if (mm != 0 || ss != 0) {
    throw std::invalid_argument("timestamp '" + raw + "' is not on an hourly boundary");
  }
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<HourStamp>(days) * 24 + hh;
}

std::string format_timestamp(HourStamp stamp) {
  const auto days = static_cast<long>(std::floor(static_cast<double>(stamp) / 24.0));
  const int hour = static_cast<int>(stamp - static_cast<HourStamp>(days) * 24);
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:00:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hour);
  return buf;
}

RawSeries read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset '" + path.string() + "' is empty");
  const auto header = split_line(line);
  if (header.size() < 2) throw std::invalid_argument("dataset needs a timestamp and at least one feature column");
  RawSeries out;
  out.columns.assign(header.begin() + 1, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("line " + std::to_string(line_no) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
    }
    const HourStamp stamp = parse_timestamp(cells[0]);
    if (!out.timestamps.empty()) {
      const HourStamp prev = out.timestamps.back();
      if (stamp == prev) {
        throw std::invalid_argument("duplicate timestamp '" + cells[0] + "' on line " +
                                    std::to_string(line_no));
      }
      if (stamp != prev + 1) {
        throw std::invalid_argument("non-hourly cadence at '" + cells[0] + "' on line " +
                                    std::to_string(line_no));
      }
    }
    out.timestamps.push_back(stamp);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      out.values.push_back(parse_number(cells[c], line_no, header[c]));
    }
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const RawSeries& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "timestamp";
  for (const auto& c : series.columns) out << ',' << c;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < series.rows(); ++r) {
    out << format_timestamp(series.timestamps[r]);
    for (std::size_t c = 0; c < series.columns.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", series.at(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::string to_string(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Validation:
      return "validation";
    case Split::Test:
      return "test";
  }
  return "train";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "validation" || name == "val") return Split::Validation;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("unknown split '" + name + "'");
}

void DataConfig::validate() const {
  if (window == 0 || horizon == 0) throw std::invalid_argument("data config: window and horizon must be positive");
  if (!(train_fraction > 0.0) || validation_fraction < 0.0 ||
      train_fraction + validation_fraction > 1.0) {
    throw std::invalid_argument("data config: invalid split fractions");
  }
}

SeriesDataset::SeriesDataset(RawSeries raw, const DataConfig& config)
    : timestamps_(std::move(raw.timestamps)),
      columns_(std::move(raw.columns)),
      raw_(std::move(raw.values)),
      window_(config.window),
      horizon_(config.horizon) {
  config.validate();
  if (raw_.size() != timestamps_.size() * columns_.size()) {
    throw std::invalid_argument("dataset: value count does not match rows x columns");
  }
  const auto find = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) throw std::invalid_argument("dataset has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns_.begin());
  };
  target_column_ = find(config.target);
  if (config.clear_sky) clear_sky_column_ = find(*config.clear_sky);

  const std::size_t n = rows();
  train_end_ = static_cast<std::size_t>(std::floor(config.train_fraction * static_cast<double>(n)));
  validation_end_ = train_end_ + static_cast<std::size_t>(
                                     std::floor(config.validation_fraction * static_cast<double>(n)));
  validation_end_ = std::min(validation_end_, n);
  if (train_end_ == 0) throw std::invalid_argument("dataset: training split is empty");
  fit_and_scale(0);
  if (config.time_features) add_time_features();
}

void SeriesDataset::fit_and_scale(std::size_t first_col) {
  const std::size_t f = columns_.size();
  scale_.resize(f);
  scaled_.resize(raw_.size());
  for (std::size_t c = first_col; c < f; ++c) {
    ScaleParams p{raw_value(0, c), raw_value(0, c)};
    for (std::size_t r = 0; r < train_end_; ++r) {
      p.min = std::min(p.min, raw_value(r, c));
      p.max = std::max(p.max, raw_value(r, c));
    }
    scale_[c] = p;
    for (std::size_t r = 0; r < rows(); ++r) scaled_[r * f + c] = p.scale(raw_value(r, c));
  }
}

void SeriesDataset::add_time_features() {
  static const char* kNames[6] = {"hour_sin", "hour_cos", "dow_sin", "dow_cos", "woy_sin", "woy_cos"};
  const std::size_t old_f = columns_.size();
  const std::size_t new_f = old_f + 6;
  std::vector<double> raw(rows() * new_f);
  for (std::size_t r = 0; r < rows(); ++r) {
    std::copy_n(raw_.begin() + static_cast<std::ptrdiff_t>(r * old_f), old_f,
                raw.begin() + static_cast<std::ptrdiff_t>(r * new_f));
    const auto tf = time_features(timestamps_[r]);
    std::copy(tf.begin(), tf.end(), raw.begin() + static_cast<std::ptrdiff_t>(r * new_f + old_f));
  }
  raw_ = std::move(raw);
  for (const char* name : kNames) columns_.emplace_back(name);
  const auto old_scale = scale_;
  fit_and_scale(old_f);
  std::copy(old_scale.begin(), old_scale.end(), scale_.begin());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < old_f; ++c) scaled_[r * new_f + c] = scale_[c].scale(raw_value(r, c));
  }
}

std::array<double, 6> time_features(HourStamp stamp) {
  const double two_pi = 2.0 * std::numbers::pi;
  const auto days = static_cast<long>(std::floor(static_cast<double>(stamp) / 24.0));
  const double hour = static_cast<double>(stamp - static_cast<HourStamp>(days) * 24);
  const std::chrono::sys_days sd{std::chrono::days{days}};
  const double dow = static_cast<double>(std::chrono::weekday{sd}.iso_encoding() - 1);
  const std::chrono::year_month_day ymd{sd};
  const auto jan1 = std::chrono::sys_days{ymd.year() / std::chrono::January / 1};
  const double doy = static_cast<double>((sd - jan1).count());
  const double week = std::floor(doy / 7.0);
  return {std::sin(two_pi * hour / 24.0), std::cos(two_pi * hour / 24.0),
          std::sin(two_pi * dow / 7.0),   std::cos(two_pi * dow / 7.0),
          std::sin(two_pi * week / 52.0), std::cos(two_pi * week / 52.0)};
}

std::pair<std::size_t, std::size_t> SeriesDataset::split_rows(Split split) const {
  switch (split) {
    case Split::Train:
      return {0, train_end_};
    case Split::Validation:
      return {train_end_, validation_end_};
    case Split::Test:
      return {validation_end_, rows()};
  }
  return {0, 0};
}

std::size_t SeriesDataset::sample_count(Split split) const {
  const auto [b, e] = split_rows(split);
  const std::size_t len = e - b;
  return len >= window_ + horizon_ ? len - window_ - horizon_ + 1 : 0;
}

std::size_t SeriesDataset::sample_start(Split split, std::size_t i) const {
  if (i >= sample_count(split)) throw std::out_of_range("sample index out of range");
  return split_rows(split).first + i;
}

std::span<const double> SeriesDataset::window_at(std::size_t start) const {
  if (start + window_ > rows()) throw std::out_of_range("window exceeds dataset");
  return {scaled_.data() + start * columns_.size(), window_ * columns_.size()};
}

std::vector<double> SeriesDataset::target_at(std::size_t start) const {
  if (start + window_ + horizon_ > rows()) throw std::out_of_range("horizon exceeds dataset");
  std::vector<double> out(horizon_);
  for (std::size_t j = 0; j < horizon_; ++j) out[j] = value(start + window_ + j, target_column_);
  return out;
}

std::vector<double> SeriesDataset::raw_target_at(std::size_t start) const {
  if (start + window_ + horizon_ > rows()) throw std::out_of_range("horizon exceeds dataset");
  std::vector<double> out(horizon_);
  for (std::size_t j = 0; j < horizon_; ++j) out[j] = raw_value(start + window_ + j, target_column_);
  return out;
}

std::vector<double> SeriesDataset::inverse_scale(std::span<const double> scaled) const {
  std::vector<double> out(scaled.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) out[i] = inverse_scale(scaled[i]);
  return out;
}

std::vector<double> SeriesDataset::scale_window(std::span<const double> raw) const {
  const std::size_t f = columns_.size();
  if (raw.size() % f != 0) throw std::invalid_argument("scale_window: size is not a multiple of the feature count");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = scale_[i % f].scale(raw[i]);
  return out;
}

SeriesDataset load_csv(const std::filesystem::path& path, const DataConfig& config) {
  return SeriesDataset(read_csv(path), config);
}

std::vector<std::vector<std::size_t>> window_batches(const SeriesDataset& ds, Split split,
                                                     std::size_t batch_size, SeededRng* rng) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  const std::size_t n = ds.sample_count(split);
  if (n == 0) {
    throw std::invalid_argument(to_string(split) + " split is shorter than window + horizon");
  }
  std::vector<std::size_t> starts(n);
  for (std::size_t i = 0; i < n; ++i) starts[i] = ds.sample_start(split, i);
  if (split == Split::Train && rng) rng->shuffle(starts);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t b = 0; b < n; b += batch_size) {
    batches.emplace_back(starts.begin() + static_cast<std::ptrdiff_t>(b),
                         starts.begin() + static_cast<std::ptrdiff_t>(std::min(n, b + batch_size)));
  }
  return batches;
}

}  // namespace sqrdln
