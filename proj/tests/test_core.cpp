#include "doctest.h"

#include <array>
#include <vector>

#include "gcd/core.hpp"

using namespace gcd;

namespace {

struct Toy {
  std::array<double, 3> x{};
  double push = 0;
};

// Three variables; one homogeneous constraint xdot_0 + xdot_1 = xdot_2.
core::ModelDefinition<Toy> toy(double push) {
  core::ModelDefinition<Toy> m;
  m.variables = {{0, "x0"}, {1, "x1"}, {2, "x2"}};
  auto one = [](const Toy&) { return 1.0; };
  m.forces.push_back({"a", 0, "mu", one, [](const Toy& c) { return c.push * c.x[0]; }});
  m.forces.push_back({"a", 1, "mu", one, [](const Toy& c) { return 2.0 * c.push; }});
  core::ConstraintDef<Toy> z;
  z.name = "balance";
  z.residual = [](const Toy&, std::span<const double> r) { return r[0] + r[1] - r[2]; };
  z.coefficients = {{0, [](const Toy&) { return 1.0; }},
                    {1, [](const Toy&) { return 1.0; }},
                    {2, [](const Toy& c) { return -c.x[2]; }}};
  m.constraints.push_back(z);
  m.prepare = [push](std::span<const double> s, double) {
    Toy c;
    std::copy(s.begin(), s.end(), c.x.begin());
    c.push = push;
    return c;
  };
  return m;
}

}  // namespace

TEST_CASE("zero forces leave a homogeneous constraint inactive") {
  const auto m = toy(0.0);
  m.validate();
  const std::vector<double> s = {1.0, 2.0, 3.0};
  const auto r = core::ex_post_derivative(m, s, 0.0);
  CHECK(r.multipliers.lambdas[0] == doctest::Approx(0.0));
  for (double v : r.rates) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("closure satisfies the constraint and matches a hand solve") {
  const auto m = toy(1.5);
  const std::vector<double> s = {2.0, 1.0, 4.0};
  const auto r = core::ex_post_derivative(m, s, 0.0);
  // forces 3 and 3; Z(lam) = 6 + lam (1 + 1 + 4)
  CHECK(r.multipliers.lambdas[0] == doctest::Approx(-1.0));
  const auto z = core::constraint_residuals(m, m.prepare(s, 0.0), r.rates);
  CHECK(std::abs(z[0]) < 1e-14);
  CHECK(core::verify_affinity(m, s, 0.0));
}

TEST_CASE("ex-ante rates carry the forces only") {
  const auto m = toy(1.0);
  const std::vector<double> s = {2.0, 1.0, 4.0};
  const auto r = core::ex_ante_derivative(m, s, 0.0);
  CHECK(r[0] == doctest::Approx(2.0));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(r[2] == doctest::Approx(0.0));
}

TEST_CASE("a vanishing coefficient column is degenerate") {
  auto m = toy(1.0);
  m.constraints[0].coefficients.clear();
  const std::vector<double> s = {2.0, 1.0, 4.0};
  CHECK_THROWS_AS(core::ex_post_derivative(m, s, 0.0), ConstraintDegeneracy);
}

TEST_CASE("definition checks") {
  auto m = toy(1.0);
  m.forces[0].variable = 7;
  CHECK_THROWS_AS(m.validate(), ModelError);
  auto n = toy(1.0);
  n.variables[1].index = 5;
  CHECK_THROWS_AS(n.validate(), ModelError);
}

TEST_CASE("multiplier length is checked") {
  const auto m = toy(1.0);
  const std::vector<double> s = {2.0, 1.0, 4.0};
  const std::vector<double> lam = {1.0, 2.0};
  CHECK_THROWS_AS(core::derivative_with_multipliers(m, m.prepare(s, 0.0), lam), ModelError);
}
