#include "doctest.h"

#include <cmath>
#include <random>

#include "gcd/macro/model.hpp"

using namespace gcd;
using namespace gcd::macro;

TEST_CASE("baseline closure") {
  const MacroParams p;
  const auto x = baseline_state();
  const auto ev = evaluate(build_model(p), x);
  const auto z = lagrangian_residuals(x, p, ev.rates);
  for (double v : z) CHECK(std::abs(v) < 1e-12);
  for (double l : ev.lambdas) CHECK(std::isfinite(l));
  CHECK(ev.lambda(Multiplier::P1) < 0.0);
}

TEST_CASE("budget residuals sum to the bank balance rate") {
  const MacroParams p;
  const auto x = baseline_state();
  const auto ev = evaluate(build_model(p), x);
  const auto b = budget_residuals(x, p, ev.rates);
  double sum = 0;
  for (double v : b) sum += v;
  CHECK(std::abs(sum + bank_balance_rate(ev.rates)) < 1e-12);
}

TEST_CASE("power factors of zero give zero rates") {
  MacroParams p = scale_powers(MacroParams{}, 0.0, 0.0);
  const auto ev = evaluate(build_model(p), baseline_state());
  for (std::size_t i = 0; i < kNumFree; ++i) CHECK(std::isfinite(ev.rates[i]));
  CHECK(ev.rate(Var::p_1) == doctest::Approx(0.0));
  CHECK(ev.rate(Var::w_1) == doctest::Approx(0.0));
}

TEST_CASE("household gradients follow finite differences") {
  const MacroParams p;
  const auto x = baseline_state();
  const auto u = utilities(x, p);
  const double h = 1e-6;
  auto d = [&](Var v) {
    auto up = x, dn = x;
    up[v] += h;
    dn[v] -= h;
    return (household_a_utility(up, p) - household_a_utility(dn, p)) / (2 * h);
  };
  CHECK(u.a_C1 * x[Var::p_1] == doctest::Approx(d(Var::C_a1)).epsilon(1e-5));
  CHECK(u.a_C2 * x[Var::p_2] == doctest::Approx(d(Var::C_a2)).epsilon(1e-5));
}

TEST_CASE("leisure ratio exceeds the consumption ratios of household b") {
  const auto u = utilities(baseline_state(), MacroParams{});
  CHECK(u.b_L1 > u.b_C1);
  CHECK(u.b_L1 > u.b_C2);
  CHECK(u.b_C1 < u.b_C2);
}

TEST_CASE("state validation") {
  const MacroParams p;
  CHECK(validate_state(baseline_state(), p).empty());
  CHECK(admissible(baseline_state(), p));
  auto x = baseline_state();
  x[Var::K_f1] = -1.0;
  CHECK_FALSE(validate_state(x, p).empty());
  try {
    check_domain(x);
    FAIL("no throw");
  } catch (const DomainError& e) {
    CHECK(e.variable() == "K_f1");
  }
  auto y = baseline_state();
  y[Var::L_a1] = 0.9;
  CHECK_THROWS_AS(check_domain(y), DomainError);
}

TEST_CASE("perturbation") {
  std::mt19937_64 rng(7);
  const auto base = baseline_state();
  const auto same = perturb(base, 0.0, rng);
  for (std::size_t i = 0; i < kNumFree; ++i) CHECK(same.values[i] == base.values[i]);
  const auto moved = perturb(base, 0.1, rng);
  int changed = 0;
  for (std::size_t i = 0; i < kNumFree; ++i) {
    if (moved.values[i] != base.values[i]) ++changed;
    if (base.values[i] > 0) CHECK(moved.values[i] > 0);
  }
  CHECK(changed > 20);
}

TEST_CASE("parameter access") {
  MacroParams p;
  set_param(p, "theta", 0.3);
  CHECK(get_param(p, "theta") == 0.3);
  CHECK_THROWS_AS(get_param(p, "nope"), ConfigError);
  p.theta = 1.2;
  try {
    validate(p);
    FAIL("no throw");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "theta");
  }
}

TEST_CASE("power scaling") {
  const MacroParams p;
  const auto s = scale_powers(p, 10.0, 0.5);
  CHECK(s.mu_p1 == doctest::Approx(500.0));
  CHECK(s.mu_r == doctest::Approx(200.0));
  CHECK(s.mu_aC1 == doctest::Approx(1.0));
  CHECK(scale_powers(p, 10.0, 1.0, false).mu_r == doctest::Approx(20.0));
}

TEST_CASE("initial conditions set the rate offsets") {
  InitialConditions ic;
  MacroParams p;
  apply_rate_offsets(ic, p);
  CHECK(p.r_M_offset == doctest::Approx(-0.001));
  CHECK(p.r_f1_offset == doctest::Approx(0.0));
  const auto x = to_state(ic);
  CHECK(x[Var::p_1] == 1.94);
  CHECK(var_from_name("A_21") == Var::A_21);
  CHECK_FALSE(var_from_name("E_f1").has_value());
}
