#include "doctest.h"

#include <cmath>

#include "gcd/stability/stability.hpp"

using namespace gcd;
using namespace gcd::macro;
using namespace gcd::stability;

namespace {

Eigen::VectorXd vec(const std::array<double, kNumFree>& a) {
  return Eigen::Map<const Eigen::VectorXd>(a.data(), kNumFree);
}

}  // namespace

TEST_CASE("negative identity has no null space") {
  const auto e = eigenanalysis(-Eigen::MatrixXd::Identity(kNumFree, kNumFree));
  CHECK(e.near_zero == 0);
  CHECK(e.null_space.cols() == 0);
  CHECK(e.max_real == doctest::Approx(-1.0));
  CHECK(e.spectral_radius == doctest::Approx(1.0));
}

TEST_CASE("projector onto the swap complement") {
  Eigen::MatrixXd q(kNumFree, 2);
  q.col(0) = vec(labor_swap_direction()).normalized();
  q.col(1) = vec(financing_swap_direction()).normalized();
  const Eigen::MatrixXd j = -(Eigen::MatrixXd::Identity(kNumFree, kNumFree) - q * q.transpose());
  const auto e = eigenanalysis(j);
  CHECK(e.near_zero == 2);
  CHECK(e.null_space.cols() == 2);
  CHECK(e.angle_labor_swap < 1e-6);
  CHECK(e.angle_financing_swap < 1e-6);
  CHECK(e.span_angle < 1e-6);
  CHECK(e.max_real == doctest::Approx(-1.0));
  CHECK(std::abs(e.eigenvalues.front()) < 1e-12);
}

TEST_CASE("swap directions are neutral at a fixed point") {
  const MacroParams p;
  const auto ss = stationary::solve_stationary(p, baseline_state());
  const auto r = reduced_jacobian(p, ss.x);
  const double scale = r.J.norm();
  CHECK((r.J * vec(labor_swap_direction())).norm() < 1e-5 * scale);
  CHECK((r.J * vec(financing_swap_direction())).norm() < 1e-5 * scale);
  CHECK(r.richardson_max_rel < 1e-3);
  const auto e = eigenanalysis(r.J);
  CHECK(e.angle_labor_swap < 1e-4);
  CHECK(e.angle_financing_swap < 1e-4);
}

TEST_CASE("log grid") {
  const auto v = log_space(3, 0.01, 100);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(0.01));
  CHECK(v[1] == doctest::Approx(1.0));
  CHECK(v[2] == doctest::Approx(100.0));
  CHECK(log_space(1, 2, 2) == std::vector<double>{2.0});
  const auto g = grid({1, 2}, {3, 4, 5});
  REQUIRE(g.size() == 6);
  CHECK(g[1].mu_p == 2);
  CHECK(g[1].mu_q == 3);
}

TEST_CASE("sweep output does not depend on the thread count") {
  const auto cells = grid({1, 100}, {1, 100});
  const auto x0 = baseline_state();
  const auto a = sweep_csv(sweep(cells, MacroParams{}, x0, 1));
  const auto b = sweep_csv(sweep(cells, MacroParams{}, x0, 3));
  CHECK(a == b);
  CHECK(a.rfind("mu_p,mu_q,class", 0) == 0);
}

TEST_CASE("base cell is unstable") {
  const auto c = classify_point(1, 1, MacroParams{}, baseline_state());
  CHECK(c.cls == CellClass::unstable_red);
  CHECK(c.has_eigen);
  CHECK(c.max_real > 0);
  CHECK(to_string(c.cls) == "unstable_red");
}

TEST_CASE("parameter sensitivity") {
  const MacroParams p;
  const auto ss = stationary::solve_stationary(p, baseline_state());
  const auto s = parameter_sensitivity(p, ss.x, {"mu_abC", "alpha_C1"});
  REQUIRE(s.d.cols() == 2);
  CHECK(s.d.col(0).norm() == 0.0);
  CHECK(s.d(static_cast<Eigen::Index>(idx(Var::C_a1)), 1) > 0);
  CHECK_THROWS_AS(parameter_sensitivity(p, ss.x, {"bogus"}), ConfigError);
}

TEST_CASE("global study with zero spread repeats the base run") {
  GlobalOptions opt;
  opt.horizon = 20;
  const auto r = randomized_global_study(MacroParams{}, baseline_state(), 3, 11, 0.0, opt);
  REQUIRE(r.runs.size() == 3);
  for (const auto& run : r.runs) {
    CHECK(run.initial.values == baseline_state().values);
    CHECK(run.outcome.stop.kind == r.runs[0].outcome.stop.kind);
    CHECK(run.outcome.stop.time == r.runs[0].outcome.stop.time);
  }
}

TEST_CASE("global study draws are reproducible") {
  GlobalOptions opt;
  opt.horizon = 5;
  const auto a = randomized_global_study(MacroParams{}, baseline_state(), 2, 5, 0.05, opt);
  opt.parallelism = 2;
  const auto b = randomized_global_study(MacroParams{}, baseline_state(), 2, 5, 0.05, opt);
  CHECK(a.runs[1].initial.values == b.runs[1].initial.values);
  CHECK(a.runs[0].initial.values != a.runs[1].initial.values);
  CHECK(to_json(a) == to_json(b));
}
