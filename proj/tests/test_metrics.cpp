#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "sqrdln/forecast.hpp"
#include "sqrdln/loss.hpp"
#include "sqrdln/metrics.hpp"
#include "sqrdln/rng.hpp"

using namespace sqrdln;

namespace {

double ref_pinball(double y, double f, double tau) {
  return y >= f ? tau * (y - f) : (1.0 - tau) * (f - y);
}

// Direct loops over [N][Q][h].
double ref_crps(const std::vector<double>& y, const std::vector<double>& f,
                const std::vector<double>& taus, std::size_t n, std::size_t h) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t k = 0; k < taus.size(); ++k)
        s += ref_pinball(y[i * h + j], f[(i * taus.size() + k) * h + j], taus[k]);
  return s / static_cast<double>(n * h);
}

std::vector<std::pair<double, double>> ref_picp(const std::vector<double>& y, const std::vector<double>& f,
                                                const std::vector<double>& taus, std::size_t n,
                                                std::size_t h) {
  const std::size_t q = taus.size();
  std::vector<std::pair<double, double>> out;
  for (std::size_t lo = q / 2; lo-- > 0;) {
    const std::size_t hi = q - 1 - lo;
    double inside = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < h; ++j) {
        const double v = y[i * h + j];
        if (v >= f[(i * q + lo) * h + j] && v <= f[(i * q + hi) * h + j]) inside += 1;
      }
    out.emplace_back(taus[hi] - taus[lo], inside / static_cast<double>(n * h));
  }
  return out;
}

}  // namespace

TEST_CASE("pinball loss values") {
  CHECK(pinball(1.0, 0.0, 0.9) == doctest::Approx(0.9));
  CHECK(pinball(0.0, 1.0, 0.9) == doctest::Approx(0.1));
  const std::vector<double> y = {1, 2, 3};
  CHECK(pinball_loss(y, y, 0.3) == 0.0);
  CHECK_THROWS(pinball_loss(y, std::vector<double>{1, 2}, 0.3));
}

TEST_CASE("pinball loss properties") {
  SeededRng rng(1);
  for (int n = 0; n < 500; ++n) {
    const double y = rng.normal(), a = rng.normal(), b = rng.normal(), tau = rng.uniform();
    CHECK(pinball(y, a, tau) >= 0.0);
    CHECK(pinball(y, 0.5 * (a + b), tau) <= 0.5 * (pinball(y, a, tau) + pinball(y, b, tau)) + 1e-15);
    CHECK(std::abs(pinball(y, a, tau) - ref_pinball(y, a, tau)) < 1e-12);
  }
  std::vector<double> y(50), f(50);
  for (std::size_t i = 0; i < 50; ++i) {
    y[i] = rng.normal();
    f[i] = rng.normal();
  }
  CHECK(std::abs(pinball_loss(y, f, 0.5) - 0.5 * mean_absolute_loss(y, f)) < 1e-12);
}

TEST_CASE("point metrics") {
  const std::vector<double> y = {1, 2, 3, 4, 5, 6};
  const std::vector<double> f = {2, 2, 1, 4, 5, 9};
  const auto m = point_metrics(y, f, 2);
  // Step 0 errors (1, 2, 0), step 1 errors (0, 0, 3).
  CHECK(m.mae == doctest::Approx(1.0));
  CHECK(m.rmse == doctest::Approx((std::sqrt(5.0 / 3.0) + std::sqrt(3.0)) / 2.0).epsilon(1e-14));
  const auto zero = point_metrics(y, y, 2);
  CHECK(zero.mae == 0.0);
  CHECK(zero.rmse == 0.0);
  std::vector<double> shifted = y;
  for (double& v : shifted) v -= 0.4;
  const auto off = point_metrics(y, shifted, 3);
  CHECK(off.mae == doctest::Approx(0.4));
  CHECK(off.rmse == doctest::Approx(0.4));
  CHECK_THROWS(point_metrics(y, std::vector<double>{1}, 2));
}

TEST_CASE("skill score") {
  CHECK(skill_score(2.0, 2.0) == 0.0);
  CHECK(skill_score(0.0, 2.0) == 1.0);
  CHECK(skill_score(4.0, 2.0) == -1.0);
  CHECK_THROWS_AS(skill_score(1.0, 0.0), std::domain_error);
}

TEST_CASE("crps matches the loop oracle") {
  SeededRng rng(2);
  const std::vector<double> taus = default_quantile_grid();
  const std::size_t n = 7, h = 3;
  std::vector<double> y(n * h), f(n * taus.size() * h);
  for (double& v : y) v = rng.normal();
  for (double& v : f) v = rng.normal();
  CHECK(std::abs(crps_approx(y, f, taus, h) - ref_crps(y, f, taus, n, h)) < 1e-12);
  std::vector<double> exact(n * taus.size() * h);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < taus.size(); ++k)
      for (std::size_t j = 0; j < h; ++j) exact[(i * taus.size() + k) * h + j] = y[i * h + j];
  CHECK(crps_approx(y, exact, taus, h) == 0.0);
  const std::vector<double> half = {0.5};
  std::vector<double> med(n * h);
  for (double& v : med) v = rng.normal();
  CHECK(std::abs(crps_approx(y, med, half, h) - pinball_loss(y, med, 0.5)) < 1e-12);
  CHECK_THROWS(crps_approx(y, med, taus, h));
}

TEST_CASE("picp and ace") {
  SeededRng rng(3);
  const std::vector<double> taus = default_quantile_grid();
  const std::size_t n = 20, h = 2, q = taus.size();
  std::vector<double> y(n * h), f(n * q * h);
  for (double& v : y) v = rng.normal();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < h; ++j) {
      std::vector<double> col(q);
      for (double& c : col) c = rng.normal();
      std::sort(col.begin(), col.end());
      for (std::size_t k = 0; k < q; ++k) f[(i * q + k) * h + j] = col[k];
    }
  const auto curve = picp(y, f, taus, h);
  const auto ref = ref_picp(y, f, taus, n, h);
  REQUIRE(curve.size() == 5);
  for (std::size_t c = 0; c < 5; ++c) {
    CHECK(std::abs(curve[c].first - ref[c].first) < 1e-12);
    CHECK(std::abs(curve[c].second - ref[c].second) < 1e-12);
  }
  double ref_ace = 0.0;
  for (const auto& [nom, emp] : ref) ref_ace += std::abs(nom - emp);
  CHECK(std::abs(ace(curve) - ref_ace / 5.0) < 1e-12);
  // Crossover-free forecasts give nested intervals.
  for (std::size_t c = 1; c < curve.size(); ++c) CHECK(curve[c].second >= curve[c - 1].second);

  // Four samples, three inside the 50% interval.
  const std::vector<double> t3 = {0.25, 0.5, 0.75};
  const std::vector<double> y4 = {0.0, 0.5, 1.0, 3.0};
  std::vector<double> f4;
  for (int i = 0; i < 4; ++i) f4.insert(f4.end(), {0.0, 0.5, 1.0});
  const auto c4 = picp(y4, f4, t3, 1);
  REQUIRE(c4.size() == 1);
  CHECK(c4[0].first == doctest::Approx(0.5));
  CHECK(c4[0].second == doctest::Approx(0.75));
  CHECK_THROWS(picp(y4, f4, std::vector<double>{0.1, 0.5, 0.7}, 1));

  CHECK(ace({{0.2, 0.3}, {0.6, 0.5}}) == doctest::Approx(0.1));
  CHECK(ace({{0.2, 0.2}, {0.6, 0.6}}) == 0.0);
  CHECK(ace({{0.2, 0.3}, {0.6, 0.7}}) == doctest::Approx(0.1));
}

TEST_CASE("reliability") {
  const std::vector<double> taus = {0.1, 0.5, 0.9};
  const std::vector<double> y = {0.0, 1.0};
  const std::vector<double> high = {5, 5, 5, 5, 5, 5};
  for (const auto& [t, freq] : reliability(y, high, taus, 1)) CHECK(freq == 1.0);
  const std::vector<double> low = {-5, -5, -5, -5, -5, -5};
  for (const auto& [t, freq] : reliability(y, low, taus, 1)) CHECK(freq == 0.0);
}

TEST_CASE("reliability of analytic gaussian quantiles") {
  SeededRng rng(4);
  const auto taus = default_quantile_grid();
  const boost::math::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t n = 100000;
  std::vector<double> y(n), f(n * taus.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = rng.normal(), sigma = rng.uniform(0.5, 2.0);
    y[i] = mu + sigma * rng.normal();
    for (std::size_t k = 0; k < taus.size(); ++k) f[i * taus.size() + k] = mu + sigma * quantile(nd, taus[k]);
  }
  for (const auto& [tau, freq] : reliability(y, f, taus, 1)) CHECK(std::abs(freq - tau) < 0.01);
}

TEST_CASE("reliability differences give picp on tie-free data") {
  SeededRng rng(5);
  const auto taus = default_quantile_grid();
  const std::size_t n = 300, q = taus.size();
  std::vector<double> y(n), f(n * q);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.normal();
    std::vector<double> col(q);
    for (double& c : col) c = rng.normal();
    std::sort(col.begin(), col.end());
    std::copy(col.begin(), col.end(), f.begin() + static_cast<std::ptrdiff_t>(i * q));
  }
  const auto rel = reliability(y, f, taus, 1);
  const auto cov = picp(y, f, taus, 1);
  for (std::size_t c = 0; c < cov.size(); ++c) {
    const std::size_t lo = q / 2 - 1 - c, hi = q - 1 - lo;
    CHECK(std::abs(cov[c].second - (rel[hi].second - rel[lo].second)) < 1e-12);
  }
}

TEST_CASE("metrics are invariant under sample permutation") {
  SeededRng rng(6);
  const auto taus = default_quantile_grid();
  const std::size_t n = 12, h = 2, q = taus.size();
  std::vector<double> y(n * h), f(n * q * h);
  for (double& v : y) v = rng.normal();
  for (double& v : f) v = rng.normal();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<double> y2(n * h), f2(n * q * h);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(perm[i] * h), h, y2.begin() + static_cast<std::ptrdiff_t>(i * h));
    std::copy_n(f.begin() + static_cast<std::ptrdiff_t>(perm[i] * q * h), q * h,
                f2.begin() + static_cast<std::ptrdiff_t>(i * q * h));
  }
  CHECK(crps_approx(y, f, taus, h) == doctest::Approx(crps_approx(y2, f2, taus, h)).epsilon(1e-13));
  CHECK(ace(picp(y, f, taus, h)) == doctest::Approx(ace(picp(y2, f2, taus, h))).epsilon(1e-13));
}

TEST_CASE("crossover rate counting") {
  ForecastBatch mono{{0.1, 0.5, 0.9}, {0, 0, 1, 1, 2, 2}, 2, 0};
  CHECK(crossover_rate(mono) == 0.0);
  ForecastBatch flip{{0.1, 0.9}, {1.0, 0.0}, 1, 0};
  CHECK(crossover_rate(flip) == 1.0);
  // Q=3, h=2: one violating cell among four adjacent pairs.
  ForecastBatch one{{0.1, 0.5, 0.9}, {0, 0, 1, 1, 0.5, 2}, 2, 0};
  CHECK(crossover_rate(one) == doctest::Approx(0.25));
  const std::vector<ForecastBatch> pooled = {mono, one};
  CHECK(crossover_rate(pooled) == doctest::Approx(0.125));
}

TEST_CASE("smart persistence") {
  std::vector<double> past_cs(24), obs(24), future(36);
  for (int i = 0; i < 24; ++i) past_cs[i] = std::max(0.0, 800.0 * std::sin((i - 6) * 3.14159265 / 12.0));
  for (int j = 0; j < 36; ++j) future[j] = past_cs[j % 24] * 1.01;
  auto same = smart_persistence(past_cs, past_cs, future);
  for (int j = 0; j < 36; ++j) {
    if (past_cs[j % 24] > 0) CHECK(same[j] == doctest::Approx(future[j]));
  }
  std::fill(obs.begin(), obs.end(), 0.0);
  for (double v : smart_persistence(obs, past_cs, future)) CHECK(v == 0.0);
  for (int i = 0; i < 24; ++i) obs[i] = 0.5 * past_cs[i];
  std::vector<double> f2(36, 800.0);
  const auto half = smart_persistence(obs, past_cs, f2);
  CHECK(half[12] == doctest::Approx(400.0));
  CHECK(half[0] == 0.0);  // night: clear-sky zero defines the ratio as zero
  CHECK_THROWS(smart_persistence(std::vector<double>(10, 1.0), std::vector<double>(10, 1.0), f2));
}
