#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sqrdln/checkpoint.hpp"
#include "sqrdln/gradcheck.hpp"
#include "sqrdln/optim.hpp"
#include "sqrdln/parameter.hpp"
#include "sqrdln/rng.hpp"

using namespace sqrdln;

TEST_CASE("adam leaves a parameter with zero gradient unchanged") {
  ParameterBlock p("p", {1});
  p[0] = 0.7;
  Adam adam;
  adam.step({&p});
  CHECK(p[0] == 0.7);
  CHECK(adam.step_count() == 1);
}

TEST_CASE("adam first step matches the hand recurrence") {
  ParameterBlock p("p", {3});
  p.assign({1.0, -2.0, 0.5});
  p.grad() = {0.3, -4.0, 1e-3};
  Adam adam(AdamConfig{0.001, 0.9, 0.999, 1e-8});
  adam.step({&p});
  const double g[3] = {0.3, -4.0, 1e-3};
  const double start[3] = {1.0, -2.0, 0.5};
  for (int i = 0; i < 3; ++i) {
    const double m = 0.1 * g[i], v = 0.001 * g[i] * g[i];
    const double mhat = m / (1 - 0.9), vhat = v / (1 - 0.999);
    CHECK(p[i] == doctest::Approx(start[i] - 0.001 * mhat / (std::sqrt(vhat) + 1e-8)).epsilon(1e-12));
  }
  // Adam normalises the first step to about lr in magnitude.
  CHECK(p[0] == doctest::Approx(1.0 - 0.001).epsilon(1e-6));
}

TEST_CASE("adam is deterministic") {
  auto run = [] {
    ParameterBlock p("p", {2});
    p.assign({1.0, 2.0});
    Adam adam;
    for (int s = 0; s < 5; ++s) {
      p.grad() = {p[0] * 2.0, std::sin(p[1])};
      adam.step({&p});
    }
    return p.values();
  };
  CHECK(run() == run());
}

TEST_CASE("adam rejects a gradient of the wrong shape") {
  ParameterBlock p("p", {2});
  p.grad().resize(3);
  Adam adam;
  CHECK_THROWS(adam.step({&p}));
}

TEST_CASE("milestone schedule") {
  const auto s = Scheduler::step_at_epochs(0.001, {1, 2, 3}, 0.1);
  CHECK(schedule_lr(s, 0, {}) == 0.001);
  const auto half = Scheduler::step_at_epochs(0.001, {1, 2}, 0.5);
  CHECK(schedule_lr(half, 2, {}) == doctest::Approx(0.00025).epsilon(1e-15));
}

TEST_CASE("step-on-increase schedule fires once per run of patience increases") {
  const auto s = Scheduler::step_on_increase(0.001, 2, 0.1);
  CHECK(schedule_lr(s, 3, {5.0, 5.1, 5.2}) == doctest::Approx(0.0001).epsilon(1e-15));
  CHECK(schedule_lr(s, 3, {5.0, 5.1, 5.0}) == 0.001);
  CHECK(schedule_lr(s, 0, {}) == 0.001);
  CHECK(count_increase_triggers({1, 2, 3, 4, 5}, 2) == 2);
  CHECK(count_increase_triggers({1, 2, 3, 4, 5}, 1) == 4);
  CHECK(count_increase_triggers({1, 2, 1, 2}, 2) == 0);
}

TEST_CASE("schedules never increase the learning rate") {
  SeededRng rng(3);
  Scheduler s = Scheduler::step_at_epochs(0.01, {2, 5}, 0.5);
  s.increase_patience = 1;
  s.increase_factor = 0.3;
  std::vector<double> history;
  double last = schedule_lr(s, 0, history);
  for (int e = 1; e < 30; ++e) {
    history.push_back(rng.uniform());
    const double lr = schedule_lr(s, e, history);
    CHECK(lr <= last);
    last = lr;
  }
}

TEST_CASE("gradient checker on closed-form losses") {
  ParameterBlock p("p", {2});
  p.assign({1.0, 2.0});
  const double sum_err = finite_difference_check(
      [&] {
        p.grad()[0] += 1.0;
        p.grad()[1] += 1.0;
        return p[0] + p[1];
      },
      {&p});
  CHECK(sum_err < 1e-9);
  const double sq_err = finite_difference_check(
      [&] {
        p.grad()[0] += 2 * p[0];
        p.grad()[1] += 2 * p[1];
        return p[0] * p[0] + p[1] * p[1];
      },
      {&p});
  CHECK(sq_err < 1e-6);
  CHECK(p[0] == 1.0);
  CHECK(p.grad()[0] == doctest::Approx(2.0));
  // A wrong analytic gradient is caught.
  const double bad = finite_difference_check(
      [&] {
        p.grad()[0] += 1.0;
        return p[0] * p[0];
      },
      {&p});
  CHECK(bad > 0.1);
  CHECK_THROWS(finite_difference_check([] { return std::nan(""); }, {&p}));
}

TEST_CASE("seeded rng reproduces its stream") {
  SeededRng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  CHECK(SeededRng(42).next() != c.next());
}

TEST_CASE("constraint satisfaction") {
  ParameterBlock n("n", {3}, Constraint::nonnegative());
  n.assign({0.0, 1.0, 2.0});
  CHECK(satisfies_constraint(n));
  n[1] = -0.1;
  CHECK_FALSE(satisfies_constraint(n));
  ParameterBlock m("m", {2, 2}, Constraint::monotone({1}));
  m.assign({0, 1, 5, 6});
  CHECK(satisfies_constraint(m));
  m.assign({1, 0, 5, 6});
  CHECK_FALSE(satisfies_constraint(m));
  m.assign({5, 6, 0, 1});  // decreasing along dim 0 is allowed
  CHECK(satisfies_constraint(m));
}

TEST_CASE("checkpoint round trip") {
  const auto path = std::filesystem::temp_directory_path() / "sqrdln_ckpt_roundtrip.ckpt";
  ParameterBlock a("a", {2, 3}, Constraint::monotone({0, 1}));
  ParameterBlock b("b", {4}, Constraint::nonnegative());
  a.assign({1, 2, 3, 4, 5, 6});
  b.assign({0.1, 1e-300, 3.5, 7.25});
  write_checkpoint(path, {{"note", "x"}}, {&a, &b});
  const Checkpoint ck = read_checkpoint(path);
  CHECK(ck.meta.at("note") == "x");
  REQUIRE(ck.blocks.size() == 2);
  CHECK(ck.blocks[0].name == "a");
  CHECK(ck.blocks[0].shape == std::vector<std::size_t>{2, 3});
  CHECK(ck.blocks[0].constraint == Constraint::monotone({0, 1}));
  CHECK(ck.blocks[1].values == b.values());

  {
    std::ifstream in(path, std::ios::binary);
    char magic[8];
    in.read(magic, 8);
    CHECK(std::string(magic, 8) == "SQRDLNCK");
  }

  ParameterBlock a2("a", {2, 3}), b2("b", {4});
  restore_blocks(ck, {&a2, &b2});
  CHECK(a2.values() == a.values());
  ParameterBlock wrong("a", {3, 2});
  CHECK_THROWS(restore_blocks(ck, {&wrong}));

  {
    std::ofstream out(path, std::ios::binary);
    out << "garbage";
  }
  CHECK_THROWS(read_checkpoint(path));
  std::filesystem::remove(path);
}
