#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sqrdln/calibrator.hpp"
#include "sqrdln/gradcheck.hpp"
#include "sqrdln/lattice.hpp"
#include "sqrdln/linear.hpp"
#include "sqrdln/projection.hpp"
#include "sqrdln/rng.hpp"

using namespace sqrdln;

namespace {

// Multilinear interpolation written as a sum of tensor-product hat functions
// over every table entry; shares no code with the cell-based evaluator.
double hat_lattice(const std::vector<double>& theta, std::size_t dims, std::size_t k,
                   const std::vector<double>& x) {
  double total = 0.0;
  std::vector<std::size_t> idx(dims, 0);
  for (std::size_t flat = 0; flat < theta.size(); ++flat) {
    std::size_t rem = flat;
    for (std::size_t d = dims; d-- > 0;) {
      idx[d] = rem % k;
      rem /= k;
    }
    double w = 1.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double u = std::clamp(x[d], 0.0, 1.0) * static_cast<double>(k - 1);
      w *= std::max(0.0, 1.0 - std::abs(u - static_cast<double>(idx[d])));
    }
    total += w * theta[flat];
  }
  return total;
}

// Isotonic regression by the min-max formula.
std::vector<double> minmax_isotonic(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = -INFINITY;
    for (std::size_t j = 0; j <= i; ++j) {
      double inner = INFINITY;
      for (std::size_t k = i; k < n; ++k) {
        double s = 0.0;
        for (std::size_t t = j; t <= k; ++t) s += y[t];
        inner = std::min(inner, s / static_cast<double>(k - j + 1));
      }
      best = std::max(best, inner);
    }
    out[i] = best;
  }
  return out;
}

double away_from_grid(SeededRng& rng, std::size_t k, double lo = 0.0, double hi = 1.0) {
  const double step = (hi - lo) / static_cast<double>(k - 1);
  for (;;) {
    const double x = rng.uniform(lo, hi);
    const double r = std::fmod(x - lo, step);
    if (r > 1e-3 && step - r > 1e-3) return x;
  }
}

}  // namespace

TEST_CASE("calibrator interpolation and clamping") {
  Calibrator id("c", {0.0, 1.0}, false);
  id.outputs().assign({0.0, 1.0});
  CHECK(id.forward(0.3) == doctest::Approx(0.3));
  CHECK(id.forward(1.7) == 1.0);
  CHECK(id.forward(-4.0) == 0.0);
  Calibrator c("c", {0.0, 0.5, 1.0}, true);
  c.outputs().assign({0.0, 2.0, 3.0});
  CHECK(c.forward(0.25) == doctest::Approx(1.0));
  CHECK(c.monotone());
  CHECK_THROWS(Calibrator("bad", {0.0, 0.0, 1.0}, false));
  CHECK_THROWS(Calibrator("bad", {1.0, 0.0}, false));
}

TEST_CASE("calibrator input derivative is zero when clamped") {
  Calibrator c("c", Calibrator::uniform_keypoints(5, 0.0, 1.0), false);
  c.init_ramp(0.0, 2.0);
  CHECK(c.backward(1.5, 1.0) == 0.0);
  CHECK(c.backward(0.3, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("interpolation weights") {
  const double a[1] = {0.0};
  CHECK(interpolation_weights(a) == std::vector<double>{1.0, 0.0});
  const double b[2] = {0.5, 0.5};
  for (double w : interpolation_weights(b)) CHECK(w == 0.25);
  const double c[2] = {0.25, 0.75};
  const auto w = interpolation_weights(c);
  CHECK(w[0] == doctest::Approx(0.1875));  // (0,0)
  CHECK(w[1] == doctest::Approx(0.0625));  // (1,0)
  CHECK(w[2] == doctest::Approx(0.5625));  // (0,1)
  CHECK(w[3] == doctest::Approx(0.1875));  // (1,1)
}

TEST_CASE("interpolation weights lie on the simplex") {
  SeededRng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(1 + trial % 4);
    for (double& v : x) v = rng.uniform(-0.2, 1.2);
    const auto w = interpolation_weights(x);
    double s = 0.0;
    for (double v : w) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("lattice forward on small tables") {
  Lattice l("l", 2, 2, {});
  // Row-major with dimension 0 most significant: index = v0 * 2 + v1.
  l.theta().assign({0.0, 2.0, 1.0, 3.0});
  const double centre[2] = {0.5, 0.5};
  CHECK(l.forward(centre) == doctest::Approx(1.5));
  const double p[2] = {0.25, 0.75};
  CHECK(l.forward(p) == doctest::Approx(1.75));
  Lattice one("one", 1, 3, {});
  one.theta().assign({0.0, 1.0, 4.0});
  const double mid[1] = {0.5};
  CHECK(one.forward(mid) == 1.0);
  const double three[3] = {0.1, 0.2, 0.3};
  CHECK_THROWS(l.forward(three));
}

TEST_CASE("lattice reproduces table entries at vertices") {
  SeededRng rng(9);
  Lattice l("l", 3, 4, {2});
  for (double& t : l.theta().values()) t = rng.normal();
  for (std::size_t flat = 0; flat < l.theta().size(); ++flat) {
    const std::size_t i0 = flat / 16, i1 = (flat / 4) % 4, i2 = flat % 4;
    const double x[3] = {i0 / 3.0, i1 / 3.0, i2 / 3.0};
    CHECK(l.forward(x) == l.theta()[flat]);
  }
}

TEST_CASE("lattice matches the hat-function oracle") {
  SeededRng rng(11);
  for (std::size_t dims = 1; dims <= 4; ++dims) {
    for (std::size_t k = 2; k <= 5; ++k) {
      Lattice l("l", dims, k, {});
      for (double& t : l.theta().values()) t = rng.normal();
      for (int n = 0; n < 1000 / 16 + 1; ++n) {
        std::vector<double> x(dims);
        for (double& v : x) v = rng.uniform(-0.1, 1.1);
        CHECK(std::abs(l.forward(x) - hat_lattice(l.theta().values(), dims, k, x)) < 1e-12);
      }
    }
  }
}

TEST_CASE("projected lattice is monotone in its flagged dimension") {
  SeededRng rng(12);
  Lattice l("l", 3, 5, {2});
  for (double& t : l.theta().values()) t = rng.normal();
  project_monotone(l.theta());
  CHECK(satisfies_constraint(l.theta()));
  for (int n = 0; n < 300; ++n) {
    std::vector<double> a = {rng.uniform(), rng.uniform(), rng.uniform()};
    std::vector<double> b = a;
    b[2] = rng.uniform(a[2], 1.0);
    CHECK(l.forward(a) <= l.forward(b) + 1e-12);
  }
}

TEST_CASE("lattice ensemble partition and shapes") {
  SeededRng rng(1);
  const auto groups = LatticeEnsemble::partition(4, 2, rng);
  CHECK(groups.size() == 2);
  LatticeEnsemble e("e", groups, 3);
  CHECK(e.size() == 2);
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(e.lattices()[i].dims() == 3);
    CHECK(e.quantile_dim(i) == 2);
    CHECK(e.lattices()[i].monotone_dims() == std::vector<std::size_t>{2});
  }
  std::vector<std::size_t> seen;
  for (const auto& g : groups) seen.insert(seen.end(), g.begin(), g.end());
  std::sort(seen.begin(), seen.end());
  CHECK(seen == std::vector<std::size_t>{0, 1, 2, 3});

  SeededRng r2(2);
  const auto big = LatticeEnsemble::partition(128, 2, r2);
  CHECK(big.size() == 64);
  std::size_t params = 0;
  LatticeEnsemble full("f", big, 21);
  for (auto* p : full.parameters()) params += p->size();
  CHECK(params == 592704);

  LatticeEnsemble single("s", {{0, 1, 2}}, 2);
  std::vector<double> out(1);
  const double feats[3] = {0.1, 0.2, 0.3};
  single.forward(feats, 0.5, out);
  CHECK(out.size() == 1);
  std::vector<double> again(1);
  single.forward(feats, 0.5, again);
  CHECK(out == again);
  CHECK_THROWS(LatticeEnsemble("bad", {{0, 5}}, 2));
}

TEST_CASE("constrained linear forward") {
  ConstrainedLinear id("id", 1, 0, 1);
  id.monotone_weight().assign({1.0});
  id.bias().assign({0.0});
  std::vector<double> out(1);
  const double x[1] = {0.37};
  id.forward(x, {}, out);
  CHECK(out[0] == 0.37);

  ConstrainedLinear b("b", 2, 0, 1);
  b.monotone_weight().assign({0.0, 0.0});
  b.bias().assign({4.5});
  const double m[2] = {3.0, -7.0};
  b.forward(m, {}, out);
  CHECK(out[0] == 4.5);

  ConstrainedLinear mix("mix", 2, 1, 1);
  mix.monotone_weight().assign({1.0, 2.0});
  mix.free_weight().assign({-1.0});
  mix.bias().assign({0.0});
  const double mono[2] = {1.0, 1.0};
  const double fr[1] = {3.0};
  mix.forward(mono, fr, out);
  CHECK(out[0] == 0.0);
  CHECK(mix.monotone_weight().constraint().kind == ConstraintKind::Nonnegative);
  const double wrong[3] = {1, 2, 3};
  CHECK_THROWS(mix.forward(wrong, fr, out));
}

TEST_CASE("constrained linear is monotone after projection") {
  SeededRng rng(4);
  ConstrainedLinear cl("cl", 3, 2, 4);
  for (auto* p : cl.parameters()) for (double& v : p->values()) v = rng.normal();
  apply_constraints(cl.parameters());
  for (int n = 0; n < 100; ++n) {
    std::vector<double> m = {rng.normal(), rng.normal(), rng.normal()}, f = {rng.normal(), rng.normal()};
    std::vector<double> a(4), b(4);
    cl.forward(m, f, a);
    m[n % 3] += rng.uniform(0.0, 2.0);
    cl.forward(m, f, b);
    for (int j = 0; j < 4; ++j) CHECK(a[j] <= b[j] + 1e-12);
  }
}

TEST_CASE("isotonic regression") {
  CHECK(isotonic_regression(std::vector<double>{3, 1, 2}) == std::vector<double>{2, 2, 2});
  CHECK(isotonic_regression(std::vector<double>{1, 2, 3}) == std::vector<double>{1, 2, 3});
  const auto w = isotonic_regression(std::vector<double>{2, 0}, std::vector<double>{3, 1});
  CHECK(w[0] == doctest::Approx(1.5));
  CHECK(w[1] == doctest::Approx(1.5));
}

TEST_CASE("monotone projection matches the min-max isotonic oracle") {
  SeededRng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.next() % 64;
    std::vector<double> y(n);
    for (double& v : y) v = rng.normal();
    ParameterBlock b("b", {n}, Constraint::monotone({0}));
    b.assign(y);
    project_monotone(b);
    const auto ref = minmax_isotonic(y);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(b[i] - ref[i]) < 1e-6);
  }
}

TEST_CASE("simple projections") {
  ParameterBlock n("n", {2}, Constraint::nonnegative());
  n.assign({-1.0, 0.5});
  project_monotone(n);
  CHECK(n.values() == std::vector<double>{0.0, 0.5});
  ParameterBlock m("m", {4}, Constraint::monotone({0}));
  m.assign({-1.0, 0.0, 0.0, 3.0});
  project_monotone(m);
  CHECK(m.values() == std::vector<double>{-1.0, 0.0, 0.0, 3.0});
}

TEST_CASE("multi-dimensional projection is feasible, idempotent and optimal") {
  SeededRng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<std::size_t> shape = {4, 3, 5};
    const std::vector<std::size_t> dims = trial % 2 ? std::vector<std::size_t>{0, 2}
                                                    : std::vector<std::size_t>{0, 1, 2};
    ParameterBlock b("b", shape, Constraint::monotone(dims));
    for (double& v : b.values()) v = rng.normal();
    const auto y = b.values();
    const auto report = project_monotone(b);
    CHECK(report.sweeps < ProjectionOptions{}.max_sweeps);
    CHECK(report.last_change < ProjectionOptions{}.tolerance);
    CHECK(satisfies_constraint(b, 1e-7));
    const auto p = b.values();

    ParameterBlock again = b;
    project_monotone(again);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(again[i] - p[i]) < 1e-9);

    // Projection onto a convex cone: <y - p, p> = 0 and <y - p, z> <= 0 for
    // every feasible z. Feasible z are built as sums of monotone ramps.
    double inner = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) inner += (y[i] - p[i]) * p[i];
    CHECK(std::abs(inner) < 1e-6);
    for (int z_trial = 0; z_trial < 20; ++z_trial) {
      std::vector<double> ramp0(4), ramp1(3), ramp2(5);
      double acc = rng.normal();
      for (double& r : ramp0) r = acc += rng.uniform();
      acc = rng.normal();
      for (double& r : ramp1) r = (trial % 2 ? rng.normal() : (acc += rng.uniform()));
      acc = rng.normal();
      for (double& r : ramp2) r = acc += rng.uniform();
      double dot = 0.0;
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j)
          for (std::size_t k = 0; k < 5; ++k) {
            const std::size_t f = (i * 3 + j) * 5 + k;
            dot += (y[f] - p[f]) * (ramp0[i] + ramp1[j] + ramp2[k]);
          }
      CHECK(dot < 1e-6);
    }
  }
}

TEST_CASE("gradient: calibrator") {
  SeededRng rng(41);
  for (int draw = 0; draw < 10; ++draw) {
    Calibrator c("c", Calibrator::uniform_keypoints(7, -1.0, 1.0), draw % 2 == 0);
    for (double& v : c.outputs().values()) v = rng.normal();
    std::vector<double> xs(6), coef(6);
    for (auto& x : xs) x = away_from_grid(rng, 7, -1.0, 1.0);
    for (auto& w : coef) w = rng.normal();
    const double err = finite_difference_check(
        [&] {
          double loss = 0.0;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            loss += coef[i] * c.forward(xs[i]);
            c.backward(xs[i], coef[i]);
          }
          return loss;
        },
        {&c.outputs()});
    CHECK(err < 1e-4);
  }
}

TEST_CASE("gradient: lattice parameters and inputs") {
  SeededRng rng(42);
  for (int draw = 0; draw < 10; ++draw) {
    Lattice l("l", 3, 4, {2});
    for (double& v : l.theta().values()) v = rng.normal();
    std::vector<double> x = {away_from_grid(rng, 4), away_from_grid(rng, 4), away_from_grid(rng, 4)};
    std::vector<double> dx(3);
    const double err = finite_difference_check(
        [&] {
          std::fill(dx.begin(), dx.end(), 0.0);
          l.backward(x, 1.7, dx);
          return 1.7 * l.forward(x);
        },
        {&l.theta()});
    CHECK(err < 1e-4);
    // Input gradient against central differences.
    for (std::size_t d = 0; d < 3; ++d) {
      auto xp = x, xm = x;
      xp[d] += 1e-6;
      xm[d] -= 1e-6;
      const double num = 1.7 * (l.forward(xp) - l.forward(xm)) / 2e-6;
      CHECK(std::abs(num - dx[d]) / std::max(1.0, std::abs(dx[d])) < 1e-4);
    }
  }
}

TEST_CASE("gradient: lattice ensemble") {
  SeededRng rng(43);
  for (int draw = 0; draw < 10; ++draw) {
    LatticeEnsemble e("e", LatticeEnsemble::partition(5, 2, rng), 3);
    for (auto* p : e.parameters()) for (double& v : p->values()) v = rng.normal();
    std::vector<double> f(5);
    for (double& v : f) v = away_from_grid(rng, 3);
    const double q = away_from_grid(rng, 3);
    std::vector<double> up(e.size());
    for (double& u : up) u = rng.normal();
    std::vector<double> df(5);
    double dq = 0.0;
    const double err = finite_difference_check(
        [&] {
          std::vector<double> out(e.size());
          e.forward(f, q, out);
          std::fill(df.begin(), df.end(), 0.0);
          dq = 0.0;
          e.backward(f, q, up, df, dq);
          return std::inner_product(out.begin(), out.end(), up.begin(), 0.0);
        },
        e.parameters());
    CHECK(err < 1e-4);
    auto eval = [&](const std::vector<double>& ff, double qq) {
      std::vector<double> out(e.size());
      e.forward(ff, qq, out);
      return std::inner_product(out.begin(), out.end(), up.begin(), 0.0);
    };
    const double num_q = (eval(f, q + 1e-6) - eval(f, q - 1e-6)) / 2e-6;
    CHECK(std::abs(num_q - dq) / std::max(1.0, std::abs(dq)) < 1e-4);
    for (std::size_t i = 0; i < 5; ++i) {
      auto fp = f, fm = f;
      fp[i] += 1e-6;
      fm[i] -= 1e-6;
      const double num = (eval(fp, q) - eval(fm, q)) / 2e-6;
      CHECK(std::abs(num - df[i]) / std::max(1.0, std::abs(df[i])) < 1e-4);
    }
  }
}

TEST_CASE("gradient: dense and constrained linear") {
  SeededRng rng(44);
  for (int draw = 0; draw < 10; ++draw) {
    Dense d("d", 4, 3);
    d.init_uniform(rng);
    ConstrainedLinear cl("cl", 2, 3, 3);
    for (auto* p : cl.parameters()) for (double& v : p->values()) v = rng.normal();
    std::vector<double> x(4), m(2), fr(3), up(3);
    for (auto* v : {&x, &m, &fr, &up}) for (double& t : *v) t = rng.normal();
    std::vector<double> dx(4), dm(2), dfree(3);
    ParameterList params = d.parameters();
    for (auto* p : cl.parameters()) params.push_back(p);
    const double err = finite_difference_check(
        [&] {
          std::vector<double> o1(3), o2(3);
          d.forward(x, o1);
          cl.forward(m, fr, o2);
          std::fill(dx.begin(), dx.end(), 0.0);
          std::fill(dm.begin(), dm.end(), 0.0);
          std::fill(dfree.begin(), dfree.end(), 0.0);
          d.backward(x, up, dx);
          cl.backward(m, fr, up, dm, dfree);
          return std::inner_product(o1.begin(), o1.end(), up.begin(), 0.0) +
                 std::inner_product(o2.begin(), o2.end(), up.begin(), 0.0);
        },
        params);
    CHECK(err < 1e-4);
    // Linear in the inputs, so the input gradient is W^T up exactly.
    for (std::size_t i = 0; i < 4; ++i) {
      double ref = 0.0;
      for (std::size_t o = 0; o < 3; ++o) ref += d.weight()[o * 4 + i] * up[o];
      CHECK(dx[i] == doctest::Approx(ref));
    }
  }
}
