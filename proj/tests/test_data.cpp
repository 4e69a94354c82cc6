#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "sqrdln/dataset.hpp"
#include "sqrdln/synth.hpp"

using namespace sqrdln;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

std::string toy_csv(std::size_t rows) {
  std::string s = "timestamp,target,flat\n";
  for (std::size_t i = 0; i < rows; ++i) {
    s += format_timestamp(parse_timestamp("2021-03-01T00:00") + static_cast<HourStamp>(i)) + "," +
         std::to_string(static_cast<double>(i % 24)) + ",5\n";
  }
  return s;
}

}  // namespace

TEST_CASE("timestamps") {
  const HourStamp a = parse_timestamp("2020-01-01T00:00:00");
  CHECK(a == 438288);
  CHECK(parse_timestamp("2020-01-01 01:00") == a + 1);
  CHECK(format_timestamp(a + 25) == "2020-01-02T01:00:00");
  CHECK_THROWS(parse_timestamp("2020-01-01T00:30"));
  CHECK_THROWS(parse_timestamp("yesterday"));
}

TEST_CASE("csv loading and scaling") {
  const auto p = write_file("sqrdln_toy.csv", toy_csv(200));
  DataConfig cfg;
  cfg.window = 10;
  cfg.horizon = 5;
  cfg.time_features = false;
  const auto ds = load_csv(p, cfg);
  CHECK(ds.rows() == 200);
  CHECK(ds.feature_count() == 2);
  // Constant column scales to zero.
  for (std::size_t r = 0; r < ds.rows(); ++r) CHECK(ds.value(r, 1) == 0.0);
  // Training-split maximum maps to exactly one.
  const auto [t0, t1] = ds.split_rows(Split::Train);
  double mx = 0.0;
  for (std::size_t r = t0; r < t1; ++r) mx = std::max(mx, ds.value(r, 0));
  CHECK(mx == 1.0);
  CHECK(ds.inverse_scale(0.0) == 0.0);
  CHECK(ds.inverse_scale(1.0) == 23.0);
  for (double v : {0.0, 3.5, 23.0, 40.0}) {
    CHECK(std::abs(ds.inverse_scale(ds.scale_params()[0].scale(v)) - v) < 1e-12);
  }
  std::filesystem::remove(p);
}

TEST_CASE("csv errors") {
  DataConfig cfg;
  cfg.window = 2;
  cfg.horizon = 1;
  const auto dup = write_file("sqrdln_dup.csv", "timestamp,target\n2020-01-01T00:00,1\n2020-01-01T00:00,2\n");
  CHECK_THROWS(load_csv(dup, cfg));
  const auto gap = write_file("sqrdln_gap.csv", "timestamp,target\n2020-01-01T00:00,1\n2020-01-01T02:00,2\n");
  CHECK_THROWS(load_csv(gap, cfg));
  const auto text = write_file("sqrdln_text.csv", "timestamp,target\n2020-01-01T00:00,abc\n");
  CHECK_THROWS(load_csv(text, cfg));
  const auto missing = write_file("sqrdln_missing.csv",
                                  "timestamp,target,x\n2020-01-01T00:00,1,\n2020-01-01T01:00,2,3\n"
                                  "2020-01-01T02:00,3,4\n2020-01-01T03:00,4,5\n2020-01-01T04:00,5,6\n");
  const auto raw = read_csv(missing);
  CHECK(raw.at(0, 1) == 0.0);
  CHECK_THROWS(load_csv(std::filesystem::temp_directory_path() / "sqrdln_absent.csv", cfg));
  for (const auto& p : {dup, gap, text, missing}) std::filesystem::remove(p);
}

TEST_CASE("time features") {
  const HourStamp midnight = parse_timestamp("2020-01-01T00:00");
  auto tf = time_features(midnight);
  CHECK(tf[0] == doctest::Approx(0.0));
  CHECK(tf[1] == doctest::Approx(1.0));
  tf = time_features(midnight + 6);
  CHECK(tf[0] == doctest::Approx(1.0));
  CHECK(std::abs(tf[1]) < 1e-12);
  for (HourStamp h = 0; h < 24 * 400; h += 7) {
    const auto f = time_features(midnight + h);
    for (int p = 0; p < 3; ++p) CHECK(std::abs(f[2 * p] * f[2 * p] + f[2 * p + 1] * f[2 * p + 1] - 1.0) < 1e-12);
  }
  const auto p = write_file("sqrdln_tf.csv", toy_csv(100));
  DataConfig cfg;
  cfg.window = 10;
  cfg.horizon = 5;
  const auto ds = load_csv(p, cfg);
  CHECK(ds.feature_count() == 8);
  CHECK(ds.columns()[2] == "hour_sin");
  std::filesystem::remove(p);
}

TEST_CASE("windowing and splits") {
  const auto p = write_file("sqrdln_win.csv", toy_csv(200));
  DataConfig cfg;
  cfg.window = 10;
  cfg.horizon = 5;
  const auto ds = load_csv(p, cfg);
  std::size_t prev_end = 0;
  for (Split s : {Split::Train, Split::Validation, Split::Test}) {
    const auto [a, b] = ds.split_rows(s);
    CHECK(a == prev_end);
    prev_end = b;
    CHECK(ds.sample_count(s) == b - a - 10 - 5 + 1);
    for (std::size_t i = 0; i < ds.sample_count(s); ++i) {
      const std::size_t start = ds.sample_start(s, i);
      CHECK(start >= a);
      CHECK(start + 15 <= b);
    }
  }
  CHECK(prev_end == 200);
  CHECK(ds.window_at(ds.sample_start(Split::Train, 0)).size() == 10 * ds.feature_count());
  CHECK(ds.target_at(0).size() == 5);
  CHECK(ds.target_at(0)[0] == ds.value(10, 0));

  SeededRng r1(3), r2(3);
  CHECK(window_batches(ds, Split::Train, 16, &r1) == window_batches(ds, Split::Train, 16, &r2));
  const auto big = window_batches(ds, Split::Validation, 1000, nullptr);
  CHECK(big.size() == 1);
  CHECK(big[0].size() == ds.sample_count(Split::Validation));
  CHECK(std::is_sorted(big[0].begin(), big[0].end()));
  std::filesystem::remove(p);

  const auto exact = write_file("sqrdln_exact.csv", toy_csv(15));
  DataConfig one = cfg;
  one.train_fraction = 1.0;
  one.validation_fraction = 0.0;
  const auto tiny = load_csv(exact, one);
  CHECK(tiny.sample_count(Split::Train) == 1);
  CHECK_THROWS(window_batches(tiny, Split::Test, 4, nullptr));
  std::filesystem::remove(exact);
}

TEST_CASE("scaling with its own parameters is idempotent") {
  const auto ds = synth_generate(SynthKind::ClearSkyRamp, 600, 2, DataConfig{"target", {}, 24, 6, 0.6, 0.2, true});
  const auto& sp = ds.scale_params();
  for (std::size_t r = 0; r < ds.rows(); r += 13) {
    for (std::size_t c = 0; c < ds.feature_count(); ++c) {
      const double once = sp[c].scale(ds.raw_value(r, c));
      CHECK(std::abs(ds.value(r, c) - once) < 1e-12);
      CHECK(std::abs(sp[c].unscale(once) - ds.raw_value(r, c)) < 1e-9 * std::max(1.0, std::abs(ds.raw_value(r, c))));
    }
  }
}

TEST_CASE("synthetic generators") {
  const auto a = synth_series(SynthKind::HeteroscedasticSine, 500, 7);
  const auto b = synth_series(SynthKind::HeteroscedasticSine, 500, 7);
  CHECK(a.values == b.values);
  for (double v : a.values) CHECK(v >= 0.0);
  const auto c = synth_series(SynthKind::ClearSkyRamp, 500, 7);
  CHECK(c.columns == std::vector<std::string>{"target", "clear_sky"});
  for (double v : c.values) CHECK(v >= 0.0);
  CHECK_THROWS(synth_series(SynthKind::ClearSkyRamp, 10, 7));
  const auto ds = synth_generate(SynthKind::ClearSkyRamp, 500, 1, DataConfig{"target", {}, 48, 36, 0.6, 0.2, true});
  CHECK(ds.clear_sky_column().has_value());
}

TEST_CASE("heteroscedastic sine matches its analytic quantiles") {
  const std::size_t n = 24 * 4000;
  const auto s = synth_series(SynthKind::HeteroscedasticSine, n, 11);
  for (int hour : {2, 9, 12, 15}) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < n; ++i) {
      if (((s.timestamps[i] % 24) + 24) % 24 == hour) vals.push_back(s.values[i]);
    }
    for (double tau : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      const double q = SineProcess::quantile(hour, tau);
      const double below = static_cast<double>(std::count_if(vals.begin(), vals.end(), [&](double v) { return v <= q; })) /
                           static_cast<double>(vals.size());
      // Binomial standard error at 4000 draws is under 0.008.
      CHECK(std::abs(below - tau) < 0.03);
    }
  }
}
