#include "doctest.h"

#include <cmath>

#include "json.hpp"

#include "gcd/stationary/stationary.hpp"

using namespace gcd;
using namespace gcd::macro;
using namespace gcd::stationary;

namespace {

// Baseline fixed point with M_a, M_b, D_f1, D_f2 and L_a1 fixed, solved
// independently with a general-purpose root finder.
MacroState reference() {
  return MacroState::from(std::array<double, kNumFree>{
    0.6037397223101633, 0.5296519144273891, 0.13466709918229772,
    0.09631103460742649, 0.11991288067103886, 0.08575913248529202,
    0.08164443890436668, 0.08196836603081763, 0.10785238514499865,
    0.0692993876491575, 0.013422438738800162, 0.008658661121816779,
    0.061, 10.846025210813874, 10.846025210813874,
    14.715129775481577, 18.321222138801065, 0.026970564111652325,
    0.019717396955240368, 7.82421967804694, 2.564854397923518,
    0.5, 0.2, 0.036599392212849635,
    0.01076495902924235,
  });
}

double max_rel(const MacroState& a, const MacroState& b) {
  double m = 0;
  for (std::size_t i = 0; i < kNumFree; ++i) {
    m = std::max(m, std::abs(a.values[i] - b.values[i]) / std::max(1e-12, std::abs(b.values[i])));
  }
  return m;
}

}  // namespace

TEST_CASE("reference fixed point is reproduced") {
  const MacroParams p;
  const auto ref = reference();
  const auto ss = solve_stationary(p, ref);
  CHECK(ss.residual < 1e-10);
  CHECK(max_rel(ss.x, ref) < 1e-9);
  CHECK(max_rel(reduced_stationary(p, family_pins(ref)), ref) < 1e-6);
  for (double r : stationarity_residual(ss.x, p)) CHECK(std::abs(r) < 1e-10);
}

TEST_CASE("reference fixed point passes every identity") {
  const MacroParams p;
  const auto ss = solve_stationary(p, reference());
  const auto rep = verify_stationary(ss, p);
  CHECK(rep.all_pass());
  REQUIRE(rep.find("deposit_rate_minus_rho") != nullptr);
  CHECK(std::abs(rep.find("deposit_rate_minus_rho")->value) < 1e-10);
  CHECK(ss.x[Var::r_g] == doctest::Approx(0.061));
  CHECK(ss.x[Var::w_1] == doctest::Approx(ss.x[Var::w_2]));
}

TEST_CASE("pins stay fixed when seeding from the published start") {
  const MacroParams p;
  const auto x0 = baseline_state();
  const auto ss = solve_stationary(p, x0);
  CHECK(verify_stationary(ss, p).all_pass());
  const auto pins = family_pins(x0);
  const auto got = family_pins(ss.x);
  CHECK(got.m_a == doctest::Approx(pins.m_a));
  CHECK(got.d_f2 == doctest::Approx(pins.d_f2));
  CHECK(pinned_variables().size() == 5);
}

TEST_CASE("quantity power scaling leaves the fixed point in place") {
  const MacroParams p;
  const auto a = solve_stationary(p, reference());
  const auto b = solve_stationary(scale_powers(p, 1.0, 3.0), reference());
  CHECK(max_rel(a.x, b.x) < 1e-9);
}

TEST_CASE("unequal discount rates are rejected") {
  MacroParams p;
  p.rho_b = 0.07;
  CHECK_THROWS_AS(solve_stationary(p, reference()), ModelError);
}

TEST_CASE("report serializes") {
  const MacroParams p;
  const auto ss = solve_stationary(p, reference());
  const auto j = nlohmann::json::parse(to_json(ss, p, verify_stationary(ss, p)));
  CHECK(j["all_pass"].get<bool>());
  CHECK(j["lambda"]["a"].get<double>() == ss.lambda_a);
}
