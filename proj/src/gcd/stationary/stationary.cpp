#include "gcd/stationary/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "gcd/errors.hpp"
#include "gcd/numeric.hpp"

namespace gcd::stationary {

using macro::idx;
using macro::kNumFree;
using macro::MacroParams;
using macro::MacroState;
using macro::Var;

namespace {

constexpr std::array<Var, 5> kPinned = {Var::L_a1, Var::D_f1, Var::D_f2, Var::M_a, Var::M_b};

constexpr std::array<Var, 14> kGuarded = {Var::K_f1, Var::K_f2, Var::A_12, Var::A_21,
                                          Var::C_a1, Var::C_a2, Var::C_b1, Var::C_b2,
                                          Var::G_g1, Var::G_g2, Var::p_1,  Var::p_2,
                                          Var::w_1,  Var::w_2};

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd as_vec(const MacroState& s) {
  return Eigen::Map<const Eigen::VectorXd>(s.values.data(), kNumFree);
}

MacroState as_state(const Eigen::VectorXd& v) {
  MacroState s;
  for (std::size_t i = 0; i < kNumFree; ++i) s.values[i] = v[static_cast<Eigen::Index>(i)];
  return s;
}

/// Largest step fraction keeping every guarded quantity above half its
/// current distance to zero.
double fraction_to_boundary(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
  double alpha = 1.0;
  auto limit = [&](double dist, double change) {
    if (change < 0.0) alpha = std::min(alpha, 0.5 * dist / -change);
  };
  for (Var v : kGuarded) limit(x[idx(v)], dx[idx(v)]);
  for (Var v : {Var::L_a1, Var::L_a2, Var::L_b1, Var::L_b2}) limit(x[idx(v)], dx[idx(v)]);
  limit(1.0 - x[idx(Var::L_a1)] - x[idx(Var::L_a2)], -dx[idx(Var::L_a1)] - dx[idx(Var::L_a2)]);
  limit(1.0 - x[idx(Var::L_b1)] - x[idx(Var::L_b2)], -dx[idx(Var::L_b1)] - dx[idx(Var::L_b2)]);
  return alpha;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Quantities of the stationary first-order conditions in units of p_1.
struct Reduced {
  double q = 0, omega = 0;                // p_2 / p_1, w / p_1
  double k1 = 0, k2 = 0, l1 = 0, l2 = 0;  // K/P, L/P
  double a21 = 0, a12 = 0;                // A_21 / P_1, A_12 / P_2
  double r_g = 0, r_M = 0, r_f1 = 0, r_f2 = 0;
};

Reduced firm_side(const MacroParams& p) {
  Reduced r;
  r.r_M = p.rho_a;
  r.r_g = r.r_M - p.r_M_offset;
  r.r_f1 = r.r_g + p.r_f1_offset;
  r.r_f2 = r.r_g + p.r_f2_offset;
  const double n1 = 1.0 - r.r_f1 * p.s_top_f1;
  const double n2 = 1.0 - r.r_f2 * p.s_top_f2;
  const double a1 = 1.0 - p.kappa_1 - p.l_1;
  const double a2 = 1.0 - p.kappa_2 - p.l_2;
  r.k1 = n1 * p.kappa_1 / (p.delta_K + r.r_f1);
  r.k2 = n2 * p.kappa_2 / (p.delta_K + r.r_f2);
  // unit-cost conditions, linear in (ln omega, ln q)
  const double c1 = p.kappa_1 * std::log(r.k1) + p.l_1 * std::log(n1 * p.l_1) +
                    a1 * std::log(n1 * a1);
  const double c2 = p.kappa_2 * std::log(r.k2) + p.l_2 * std::log(n2 * p.l_2) +
                    a2 * std::log(n2 * a2);
  Eigen::Matrix2d m;
  m << p.l_1, a1, p.l_2, -(p.l_2 + a2);
  const Eigen::Vector2d sol = m.fullPivLu().solve(Eigen::Vector2d(c1, c2));
  r.omega = std::exp(sol[0]);
  r.q = std::exp(sol[1]);
  r.l1 = n1 * p.l_1 / r.omega;
  r.l2 = n2 * p.l_2 * r.q / r.omega;
  r.a21 = n1 * a1 / r.q;
  r.a12 = n2 * a2 * r.q;
  return r;
}

struct Demands {
  double Ca1, Ca2, Cb1, Cb2, G1, G2, La, Lb, P1, P2;
};

Demands demands(const MacroParams& p, const Reduced& r, double La_, double Lb_, double Lg_) {
  Demands d{};
  const double th = p.theta;
  auto household = [&](double lam, double mu1, double mu2, double muL, double e1, double e2,
                       double eL, double& c1, double& c2, double& labor) {
    const double ratio = (mu2 * e2) / (mu1 * e1 * r.q);
    c1 = std::pow(lam / (mu1 * e1 * std::pow(ratio, e2)), 1.0 / (e1 + e2 - 1.0));
    c2 = ratio * c1;
    labor = 1.0 - std::pow(lam * r.omega * (1.0 - th) / (muL * eL), 1.0 / (eL - 1.0));
  };
  household(La_, p.mu_aC1, p.mu_aC2, p.mu_aL1, p.alpha_C1, p.alpha_C2, p.alpha_L, d.Ca1, d.Ca2,
            d.La);
  household(Lb_, p.mu_bC1, p.mu_bC2, p.mu_bL1, p.beta_C1, p.beta_C2, p.beta_L, d.Cb1, d.Cb2,
            d.Lb);
  d.G1 = std::pow(Lg_ / (p.mu_aG1 * p.alpha_G1), 1.0 / (p.alpha_G1 - 1.0));
  d.G2 = std::pow(Lg_ * r.q / (p.mu_bG2 * p.beta_G2), 1.0 / (p.beta_G2 - 1.0));
  Eigen::Matrix2d m;
  m << 1.0 - p.delta_K * r.k1, -r.a12, -r.a21, 1.0 - p.delta_K * r.k2;
  const Eigen::Vector2d out =
      m.fullPivLu().solve(Eigen::Vector2d(d.Ca1 + d.Cb1 + d.G1, d.Ca2 + d.Cb2 + d.G2));
  d.P1 = out[0];
  d.P2 = out[1];
  return d;
}

// Labor market, government budget and household a's budget, all in units of p_1.
Eigen::Vector3d reduced_residual(const MacroParams& p, const Reduced& r, const FamilyPins& pins,
                                 const Eigen::Vector3d& u) {
  const Demands d = demands(p, r, std::exp(u[0]), std::exp(u[1]), std::exp(u[2]));
  const double d_g = pins.m_a + pins.m_b - pins.d_f1 - pins.d_f2;
  const double labor = r.l1 * d.P1 + r.l2 * d.P2;
  const double pi1 = d.P1 * (1.0 - p.delta_K * r.k1 - r.q * r.a21 - r.omega * r.l1) -
                     r.r_f1 * pins.d_f1;
  const double pi2 = d.P2 * (r.q - r.q * p.delta_K * r.k2 - r.a12 - r.omega * r.l2) -
                     r.r_f2 * pins.d_f2;
  const double pib = r.r_f1 * pins.d_f1 + r.r_f2 * pins.d_f2 + r.r_g * d_g -
                     r.r_M * (pins.m_a + pins.m_b);
  Eigen::Vector3d e;
  e[0] = d.La + d.Lb - labor;
  e[1] = r.r_g * d_g + d.G1 + r.q * d.G2 - p.theta * r.omega * labor;
  e[2] = d.Ca1 + r.q * d.Ca2 - (1.0 - p.theta) * r.omega * d.La - p.e_a * (pi1 + pi2 + pib) -
         r.r_M * pins.m_a;
  return e;
}

/// Damped Newton on the three-multiplier system from one starting point.
bool newton3(const MacroParams& p, const Reduced& r, const FamilyPins& pins,
             Eigen::Vector3d& u) {
  auto merit = [&](const Eigen::Vector3d& v) {
    const Eigen::Vector3d e = reduced_residual(p, r, pins, v);
    return e.allFinite() ? e.cwiseAbs().maxCoeff() : kInf;
  };
  double m = merit(u);
  for (int it = 0; it < 200 && m > 1e-15; ++it) {
    const Eigen::Vector3d e = reduced_residual(p, r, pins, u);
    Eigen::Matrix3d j;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d up = u, dn = u;
      up[k] += 1e-7;
      dn[k] -= 1e-7;
      j.col(k) = (reduced_residual(p, r, pins, up) - reduced_residual(p, r, pins, dn)) / 2e-7;
    }
    Eigen::Vector3d step = j.fullPivLu().solve(-e);
    if (!step.allFinite()) return false;
    const double cap = step.cwiseAbs().maxCoeff();
    if (cap > 2.0) step *= 2.0 / cap;
    double alpha = 1.0;
    double trial = merit(u + step);
    while (!(trial < m) && alpha > 1e-10) {
      alpha *= 0.5;
      trial = merit(u + alpha * step);
    }
    if (!(trial < m)) break;
    u += alpha * step;
    m = trial;
  }
  return m < 1e-12;
}

Eigen::VectorXd pinned_system(const macro::Model& model, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& pins) {
  const auto ev = macro::evaluate(model, as_state(x));
  Eigen::VectorXd f(kNumFree + kPinned.size());
  for (std::size_t i = 0; i < kNumFree; ++i) f[static_cast<Eigen::Index>(i)] = ev.rates[i];
  for (std::size_t k = 0; k < kPinned.size(); ++k) {
    f[static_cast<Eigen::Index>(kNumFree + k)] =
        x[idx(kPinned[k])] - pins[static_cast<Eigen::Index>(k)];
  }
  return f;
}

}  // namespace

std::array<Var, 5> pinned_variables() { return kPinned; }

FamilyPins family_pins(const MacroState& g) {
  FamilyPins pins;
  const double p1 = g[Var::p_1];
  if (!(p1 > 0.0)) throw ConfigError("p_1", "p_1 must be positive");
  const double La = g[Var::L_a1] + g[Var::L_a2];
  const double L1 = g[Var::L_a1] + g[Var::L_b1];
  const double L2 = g[Var::L_a2] + g[Var::L_b2];
  const double lo = std::max(0.0, La - L2);
  const double hi = std::min(La, L1);
  pins.labor_position = hi > lo ? std::clamp((g[Var::L_a1] - lo) / (hi - lo), 0.0, 1.0) : 0.5;
  pins.m_a = g[Var::M_a] / p1;
  pins.m_b = g[Var::M_b] / p1;
  pins.d_f1 = g[Var::D_f1] / p1;
  pins.d_f2 = g[Var::D_f2] / p1;
  return pins;
}

std::array<double, kNumFree> stationarity_residual(const MacroState& x, const MacroParams& p) {
  const auto model = macro::build_model(p);
  return macro::evaluate(model, x).free_rates();
}

MacroState reduced_stationary(const MacroParams& p, const FamilyPins& pins) {
  const double d_g = pins.m_a + pins.m_b - pins.d_f1 - pins.d_f2;
  if (!(d_g > 0.0)) {
    throw SolverError("no stationary state: government credit implied by the pins is not positive");
  }
  const Reduced r = firm_side(p);
  Eigen::Vector3d u;
  bool found = false;
  for (double s0 : {0.0, -2.0, 2.0, -4.0, 4.0, -6.0, 6.0, -8.0, 8.0, -11.0, 11.0}) {
    for (double s1 : {0.0, -2.0, 2.0}) {
      u = Eigen::Vector3d(s0, s0, s0 + s1);
      if (newton3(p, r, pins, u)) {
        found = true;
        break;
      }
    }
    if (found) break;
  }
  if (!found) throw SolverError("stationary conditions: multiplier system has no root");

  const double La_ = std::exp(u[0]), Lb_ = std::exp(u[1]), Lg_ = std::exp(u[2]);
  const Demands d = demands(p, r, La_, Lb_, Lg_);
  const double gamma = p.gamma_D + p.gamma_r * r.r_g;
  const double p1 = Lg_ * (1.0 + r.q) / (2.0 * p.mu_gD * gamma * d_g);

  MacroState x;
  x[Var::p_1] = p1;
  x[Var::p_2] = r.q * p1;
  x[Var::w_1] = x[Var::w_2] = r.omega * p1;
  x[Var::r_g] = r.r_g;
  x[Var::K_f1] = r.k1 * d.P1;
  x[Var::K_f2] = r.k2 * d.P2;
  x[Var::A_21] = r.a21 * d.P1;
  x[Var::A_12] = r.a12 * d.P2;
  x[Var::S_f1] = p.s_top_f1 * d.P1;
  x[Var::S_f2] = p.s_top_f2 * d.P2;
  x[Var::C_a1] = d.Ca1;
  x[Var::C_a2] = d.Ca2;
  x[Var::C_b1] = d.Cb1;
  x[Var::C_b2] = d.Cb2;
  x[Var::G_g1] = d.G1;
  x[Var::G_g2] = d.G2;
  const double L1 = r.l1 * d.P1;
  const double L2 = r.l2 * d.P2;
  const double lo = std::max(0.0, d.La - L2);
  const double hi = std::min(d.La, L1);
  x[Var::L_a1] = lo + pins.labor_position * (hi - lo);
  x[Var::L_a2] = d.La - x[Var::L_a1];
  x[Var::L_b1] = L1 - x[Var::L_a1];
  x[Var::L_b2] = d.Lb - x[Var::L_b1];
  x[Var::M_a] = pins.m_a * p1;
  x[Var::M_b] = pins.m_b * p1;
  x[Var::D_f1] = pins.d_f1 * p1;
  x[Var::D_f2] = pins.d_f2 * p1;
  if (auto bad = macro::validate_state(x, p); !bad.empty()) {
    throw SolverError("stationary conditions give an infeasible state: " + bad.front());
  }
  return x;
}

StationaryState refine_stationary(const MacroParams& p, const MacroState& start,
                                  const NewtonOptions& opt) {
  if (auto bad = macro::validate_state(start, p); !bad.empty()) {
    throw ConfigError("guess", "infeasible stationary guess: " + bad.front());
  }
  const auto model = macro::build_model(p);
  Eigen::VectorXd pins(kPinned.size());
  for (std::size_t k = 0; k < kPinned.size(); ++k) {
    pins[static_cast<Eigen::Index>(k)] = start[kPinned[k]];
  }
  auto system = [&](const Eigen::VectorXd& x) { return pinned_system(model, x, pins); };
  auto merit = [&](const Eigen::VectorXd& x) -> double {
    try {
      return max_abs(system(x));
    } catch (const DomainError&) {
      return kInf;
    } catch (const ConstraintDegeneracy&) {
      return kInf;
    }
  };

  Eigen::VectorXd x = as_vec(start);
  double m = merit(x);
  int it = 0;
  for (; it < opt.max_iterations && m > opt.target; ++it) {
    const Eigen::MatrixXd j = numeric::central_jacobian(system, x);
    const Eigen::VectorXd dx = j.colPivHouseholderQr().solve(-system(x));
    if (!dx.allFinite()) throw SolverError("stationary Newton: singular Jacobian");
    double alpha = fraction_to_boundary(x, dx);
    double trial = merit(x + alpha * dx);
    int halvings = 0;
    while (!(trial < m) && halvings < 40) {
      alpha *= 0.5;
      trial = merit(x + alpha * dx);
      ++halvings;
    }
    if (!(trial < m)) break;
    x += alpha * dx;
    m = trial;
  }

  StationaryState ss;
  ss.x = as_state(x);
  ss.iterations = it;
  const auto ev = macro::evaluate(model, ss.x);
  double r = 0.0;
  for (std::size_t i = 0; i < kNumFree; ++i) r = std::max(r, std::abs(ev.rates[i]));
  ss.residual = r;
  if (!(r <= opt.tolerance)) {
    std::ostringstream os;
    os << "stationary Newton did not converge: max |rate| = " << r << " after " << it
       << " iterations";
    throw SolverError(os.str());
  }
  ss.lambda_a = ev.lambda(macro::Multiplier::a);
  ss.lambda_b = ev.lambda(macro::Multiplier::b);
  ss.lambda_g = ev.lambda(macro::Multiplier::g);
  return ss;
}

StationaryState solve_stationary(const MacroParams& p, const MacroState& guess,
                                 const NewtonOptions& opt) {
  if (p.rho_a != p.rho_b) {
    throw ModelError("no stationary state: rho_a != rho_b, so r_M cannot settle at both rates");
  }
  if (auto bad = macro::validate_state(guess, p); !bad.empty()) {
    throw ConfigError("guess", "infeasible stationary guess: " + bad.front());
  }
  return refine_stationary(p, reduced_stationary(p, family_pins(guess)), opt);
}

bool VerificationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

VerificationReport verify_stationary(const StationaryState& ss, const MacroParams& p) {
  VerificationReport rep;
  auto add = [&](std::string name, double value, double tol) {
    rep.checks.push_back({std::move(name), value, tol, std::abs(value) <= tol});
  };
  auto rel = [](double a, double b) { return (a - b) / std::max(std::abs(b), 1e-300); };

  const auto& x = ss.x;
  const auto d = macro::dependents(x, p);
  add("max_rate", ss.residual, 1e-10);

  // profits are the return on equity
  add("profit_equity_f1_rel", rel(d.pi_f1, d.r_f1 * d.E_f1), 1e-8);
  add("profit_equity_f2_rel", rel(d.pi_f2, d.r_f2 * d.E_f2), 1e-8);

  // marginal utility per price equal across goods and leisure
  const auto u = macro::utilities(x, p);
  auto spread = [](std::initializer_list<double> v) {
    const auto [lo, hi] = std::minmax(v);
    return (hi - lo) / std::max(std::abs(hi), 1e-300);
  };
  add("foc_a_spread_rel", spread({u.a_C1, u.a_C2, u.a_L1, u.a_L2}), 1e-8);
  add("foc_b_spread_rel", spread({u.b_C1, u.b_C2, u.b_L1, u.b_L2}), 1e-8);

  add("wage_equality_rel", rel(x[Var::w_1], x[Var::w_2]), 1e-8);
  add("deposit_rate_minus_rho", d.r_M - p.rho_a, 1e-10);

  // income distributed by each sector equals value added net of depreciation
  const double p1 = x[Var::p_1], p2 = x[Var::p_2];
  const double inc1 = d.pi_f1 + d.r_f1 * x[Var::D_f1] + x[Var::w_1] * d.L_f1;
  const double inc2 = d.pi_f2 + d.r_f2 * x[Var::D_f2] + x[Var::w_2] * d.L_f2;
  const double va1 = p1 * d.P_f1 - p2 * x[Var::A_21] - p.delta_K * p1 * x[Var::K_f1];
  const double va2 = p2 * d.P_f2 - p1 * x[Var::A_12] - p.delta_K * p2 * x[Var::K_f2];
  add("income_identity_f1_rel", (inc1 - va1) / (p1 * d.P_f1), 1e-10);
  add("income_identity_f2_rel", (inc2 - va2) / (p2 * d.P_f2), 1e-10);

  // labor share (1 - r s) l_i, which is l_i without inventories
  const double n1 = 1.0 - d.r_f1 * p.s_top_f1;
  const double n2 = 1.0 - d.r_f2 * p.s_top_f2;
  add("labor_share_f1_minus_target", x[Var::w_1] * d.L_f1 / (p1 * d.P_f1) - n1 * p.l_1, 1e-10);
  add("labor_share_f2_minus_target", x[Var::w_2] * d.L_f2 / (p2 * d.P_f2) - n2 * p.l_2, 1e-10);

  // government: marginal utility of spending against the debt burden
  const double gamma = p.gamma_D + p.gamma_r * x[Var::r_g];
  const double lg = ss.lambda_g;
  add("government_debt_foc_rel", rel(-lg / p.mu_gD, 2.0 * gamma * d.D_g / (p1 + p2)), 1e-8);
  add("government_g1_foc_rel",
      rel(p.alpha_G1 * std::pow(x[Var::G_g1], p.alpha_G1 - 1.0), -lg / p.mu_aG1 * p1), 1e-8);
  add("government_g2_foc_rel",
      rel(p.beta_G2 * std::pow(x[Var::G_g2], p.beta_G2 - 1.0), -lg / p.mu_bG2 * p2), 1e-8);
  const double taxes = d.T_a + d.T_b;
  add("government_budget_rel",
      (x[Var::r_g] * d.D_g + p1 * x[Var::G_g1] + p2 * x[Var::G_g2] - taxes) / taxes, 1e-10);
  add("tax_base_rel",
      (p.theta * (p1 * n1 * p.l_1 * d.P_f1 + p2 * n2 * p.l_2 * d.P_f2) - taxes) / taxes, 1e-10);
  return rep;
}

std::string to_json(const StationaryState& ss, const MacroParams& p,
                    const VerificationReport& report) {
  nlohmann::ordered_json j;
  for (std::size_t i = 0; i < kNumFree; ++i) j["state"][macro::kRateNames[i]] = ss.x.values[i];
  const auto d = macro::dependents(ss.x, p);
  for (const auto& f : macro::dependent_fields()) j["dependents"][f.name] = d.*f.member;
  j["lambda"] = {{"a", ss.lambda_a}, {"b", ss.lambda_b}, {"g", ss.lambda_g}};
  j["residual"] = ss.residual;
  j["iterations"] = ss.iterations;
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    checks.push_back(
        {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  }
  j["all_pass"] = report.all_pass();
  return j.dump(2);
}

}  // namespace gcd::stationary
