#include "doctest.h"

#include <cmath>

#include "gcd/integrator/integrator.hpp"

using namespace gcd;
using namespace gcd::integrator;
using macro::Var;

TEST_CASE("paths interpolate and jump") {
  const std::vector<Breakpoint> path = {{0, 1}, {10, 2}, {20, 2}, {20, 5}};
  CHECK(evaluate_path(path, -1) == 1);
  CHECK(evaluate_path(path, 5) == doctest::Approx(1.5));
  CHECK(evaluate_path(path, 20) == 5);
  CHECK(evaluate_path(path, 20, true) == 2);
  CHECK(evaluate_path(path, 99) == 5);
}

TEST_CASE("schedule checks") {
  Schedule s;
  s.paths["gamma_D"] = {{0, 0.5}, {10, 0.6}, {10, 0.7}};
  s.validate();
  CHECK(s.jump_times() == std::vector<double>{10});
  CHECK(apply_schedule(macro::MacroParams{}, s, 5).gamma_D == doctest::Approx(0.55));
  s.paths["no_such"] = {{0, 1}};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  Schedule back;
  back.paths["theta"] = {{5, 0.1}, {1, 0.2}};
  CHECK_THROWS_AS(back.validate(), ConfigError);
}

TEST_CASE("run config checks") {
  RunConfig c;
  c.validate();
  c.t_end = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("baseline run hits the positivity floor in L_b2") {
  RunConfig c;
  c.t_end = 20;
  const auto tr = integrate(macro::MacroParams{}, {}, macro::baseline_state(), c);
  CHECK(tr.stop.kind == StopKind::positivity_abort);
  CHECK(tr.stop.variable == "L_b2");
  CHECK(tr.stop.time == doctest::Approx(10.65).epsilon(0.002));
  CHECK(tr.samples.front().t == 0.0);
  CHECK(tr.samples.size() > 100);
}

TEST_CASE("short run stays on the constraint manifold") {
  RunConfig c;
  c.t_end = 1;
  const macro::MacroParams p;
  const auto tr = integrate(p, {}, macro::baseline_state(), c);
  CHECK(tr.stop.kind == StopKind::completed);
  CHECK(tr.back().t == doctest::Approx(1.0));
  for (const auto& s : tr.samples) {
    for (double z : macro::lagrangian_residuals(s.x, p, s.ev.rates)) CHECK(std::abs(z) < 1e-10);
  }
}

TEST_CASE("zero powers freeze prices while quantities still clear") {
  RunConfig c;
  c.t_end = 0.2;
  const auto p = macro::scale_powers(macro::MacroParams{}, 0.0, 0.0);
  const auto x0 = macro::baseline_state();
  const auto tr = integrate(p, {}, x0, c);
  CHECK_FALSE(tr.aborted());
  for (Var v : {Var::p_1, Var::p_2, Var::w_1, Var::w_2, Var::r_g}) CHECK(tr.back().x[v] == x0[v]);
  CHECK(tr.back().x[Var::C_a1] < x0[Var::C_a1]);
}

TEST_CASE("neutral projection ignores the swap directions") {
  const auto x = macro::baseline_state();
  auto y = x;
  const auto l = macro::labor_swap_direction();
  const auto f = macro::financing_swap_direction();
  for (std::size_t i = 0; i < macro::kNumFree; ++i) y.values[i] += 0.01 * l[i] + 0.02 * f[i];
  CHECK(neutral_projected_deviation(y, x) < 1e-12);
  y[Var::K_f1] *= 1.1;
  CHECK(neutral_projected_deviation(y, x) > 0.05);
}

TEST_CASE("convergence detection") {
  Trajectory tr;
  const auto ref = macro::baseline_state();
  for (int k = 0; k <= 10; ++k) {
    Sample s;
    s.t = k;
    s.x = ref;
    s.x[Var::K_f1] *= 1.0 + 0.4 / (1 + k * k);
    tr.samples.push_back(s);
  }
  const auto t = detect_convergence(tr, ref, 0.01);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(7.0));
  CHECK_FALSE(detect_convergence(tr, ref, 1e-6).has_value());
}
