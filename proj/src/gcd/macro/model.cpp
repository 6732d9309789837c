#include "gcd/macro/model.hpp"

#include <cmath>
#include <sstream>

#include "gcd/errors.hpp"

namespace gcd::macro {

namespace {

#define GCD_DEP(f) DependentField{#f, &DependentQuantities::f}
constexpr std::array kDependentFields = {
    GCD_DEP(L_f1), GCD_DEP(L_f2),  GCD_DEP(T_a),   GCD_DEP(T_b),     GCD_DEP(r_f1),
    GCD_DEP(r_f2), GCD_DEP(r_M),   GCD_DEP(E_f1),  GCD_DEP(E_f2),    GCD_DEP(E_bank),
    GCD_DEP(V_a),  GCD_DEP(V_b),   GCD_DEP(V_g),   GCD_DEP(D_g),     GCD_DEP(pi_f1),
    GCD_DEP(pi_f2), GCD_DEP(pi_bank), GCD_DEP(P_f1), GCD_DEP(P_f2),
};
#undef GCD_DEP

#define GCD_UTIL(f) UtilityField{#f, &UtilityRecord::f}
constexpr std::array kUtilityFields = {
    GCD_UTIL(U_a),  GCD_UTIL(U_b),  GCD_UTIL(U_g),  GCD_UTIL(U_f1), GCD_UTIL(U_f2),
    GCD_UTIL(a_C1), GCD_UTIL(a_C2), GCD_UTIL(a_L1), GCD_UTIL(a_L2), GCD_UTIL(b_C1),
    GCD_UTIL(b_C2), GCD_UTIL(b_L1), GCD_UTIL(b_L2), GCD_UTIL(f1_K), GCD_UTIL(f1_L),
    GCD_UTIL(f1_A), GCD_UTIL(f2_K), GCD_UTIL(f2_L), GCD_UTIL(f2_A),
};
#undef GCD_UTIL

constexpr std::array<Var, 16> kPositive = {
    Var::K_f1, Var::K_f2, Var::L_a1, Var::L_a2, Var::L_b1, Var::L_b2, Var::C_a1, Var::C_a2,
    Var::C_b1, Var::C_b2, Var::G_g1, Var::G_g2, Var::A_12, Var::A_21, Var::p_1, Var::p_2};

double production(double K, double L, double A, double kappa, double l) {
  return std::pow(K, kappa) * std::pow(L, l) * std::pow(A, 1.0 - kappa - l);
}

using Fn = std::function<double(const Context&)>;

Fn param_of(double MacroParams::*m) {
  return [m](const Context& c) { return c.p.*m; };
}

std::string pname(double MacroParams::*m) {
  for (const auto& f : param_fields()) {
    if (f.member == m) return std::string(f.name);
  }
  return "?";
}

Model assemble(ParamsAt params_at) {
  Model m;
  for (std::size_t i = 0; i < kNumRates; ++i) {
    m.variables.push_back({i, std::string(kRateNames[i])});
  }

  m.prepare = [params_at = std::move(params_at)](std::span<const double> state, double t) {
    Context c;
    c.x = MacroState::from(state);
    check_domain(c.x);
    c.t = t;
    c.p = params_at(t);
    c.d = dependents(c.x, c.p);
    c.leisure_a = 1.0 - c.x[Var::L_a1] - c.x[Var::L_a2];
    c.leisure_b = 1.0 - c.x[Var::L_b1] - c.x[Var::L_b2];
    return c;
  };

  auto force = [&](std::string agent, std::size_t target, double MacroParams::*mu, Fn f) {
    m.forces.push_back({std::move(agent), target, pname(mu), param_of(mu), std::move(f)});
  };
  const auto I = [](Var v) { return idx(v); };

  // households: leisure, consumption, saving
  force("a", I(Var::L_a1), &MacroParams::mu_aL1, [](const Context& c) {
    return -c.p.alpha_L * std::pow(c.leisure_a, c.p.alpha_L - 1.0);
  });
  force("a", I(Var::L_a2), &MacroParams::mu_aL2, [](const Context& c) {
    return -c.p.alpha_L * std::pow(c.leisure_a, c.p.alpha_L - 1.0);
  });
  force("b", I(Var::L_b1), &MacroParams::mu_bL1, [](const Context& c) {
    return -c.p.beta_L * std::pow(c.leisure_b, c.p.beta_L - 1.0);
  });
  force("b", I(Var::L_b2), &MacroParams::mu_bL2, [](const Context& c) {
    return -c.p.beta_L * std::pow(c.leisure_b, c.p.beta_L - 1.0);
  });
  force("a", I(Var::C_a1), &MacroParams::mu_aC1, [](const Context& c) {
    return c.p.alpha_C1 * std::pow(c[Var::C_a1], c.p.alpha_C1 - 1.0) *
           std::pow(c[Var::C_a2], c.p.alpha_C2);
  });
  force("a", I(Var::C_a2), &MacroParams::mu_aC2, [](const Context& c) {
    return c.p.alpha_C2 * std::pow(c[Var::C_a1], c.p.alpha_C1) *
           std::pow(c[Var::C_a2], c.p.alpha_C2 - 1.0);
  });
  force("b", I(Var::C_b1), &MacroParams::mu_bC1, [](const Context& c) {
    return c.p.beta_C1 * std::pow(c[Var::C_b1], c.p.beta_C1 - 1.0) *
           std::pow(c[Var::C_b2], c.p.beta_C2);
  });
  force("b", I(Var::C_b2), &MacroParams::mu_bC2, [](const Context& c) {
    return c.p.beta_C2 * std::pow(c[Var::C_b1], c.p.beta_C1) *
           std::pow(c[Var::C_b2], c.p.beta_C2 - 1.0);
  });

  // social influence on consumption, active only in the conspicuous variant
  auto social = [&](std::string agent, Var target, double MacroParams::*mu, Var source) {
    m.forces.push_back({std::move(agent), I(target), pname(mu),
                        [mu](const Context& c) { return c.p.conspicuous ? c.p.*mu : 0.0; },
                        [source](const Context& c) { return c[source]; }});
  };
  social("b", Var::C_a1, &MacroParams::mu_baC, Var::C_b1);
  social("b", Var::C_a2, &MacroParams::mu_baC, Var::C_b2);
  social("a", Var::C_b1, &MacroParams::mu_abC, Var::C_a1);
  social("a", Var::C_b2, &MacroParams::mu_abC, Var::C_a2);

  force("a", I(Var::M_a), &MacroParams::mu_aM, [](const Context& c) {
    const auto& p = c.p;
    return (1.0 + p.alpha_r * (c.d.r_M - p.rho_a)) * 2.0 * p.alpha_L *
           std::pow(c.leisure_a, p.alpha_L - 1.0) /
           ((1.0 - p.theta) * (c[Var::w_1] + c[Var::w_2]));
  });
  force("b", I(Var::M_b), &MacroParams::mu_bM, [](const Context& c) {
    const auto& p = c.p;
    return (1.0 + p.beta_r * (c.d.r_M - p.rho_b)) * 2.0 * p.beta_L *
           std::pow(c.leisure_b, p.beta_L - 1.0) /
           ((1.0 - p.theta) * (c[Var::w_1] + c[Var::w_2]));
  });

  // government
  force("g", idx(RateVar::D_g), &MacroParams::mu_gD, [](const Context& c) {
    if (c.d.D_g <= 0.0) return 0.0;
    return -(c.p.gamma_D + c.p.gamma_r * c[Var::r_g]) * c.d.D_g /
           ((c[Var::p_1] + c[Var::p_2]) / 2.0);
  });
  force("a", I(Var::G_g1), &MacroParams::mu_aG1, [](const Context& c) {
    return c.p.alpha_G1 * std::pow(c[Var::G_g1], c.p.alpha_G1 - 1.0);
  });
  force("b", I(Var::G_g2), &MacroParams::mu_bG2, [](const Context& c) {
    return c.p.beta_G2 * std::pow(c[Var::G_g2], c.p.beta_G2 - 1.0);
  });

  // firms: gradients of expected profits and the inventory target
  force("f1", I(Var::K_f1), &MacroParams::mu_fK1, [](const Context& c) {
    const auto& p = c.p;
    const double r = c.d.r_f1;
    return c[Var::p_1] *
           ((1.0 - r * p.s_top_f1) * p.kappa_1 * c.d.P_f1 / c[Var::K_f1] - p.delta_K - r);
  });
  force("f2", I(Var::K_f2), &MacroParams::mu_fK2, [](const Context& c) {
    const auto& p = c.p;
    const double r = c.d.r_f2;
    return c[Var::p_2] *
           ((1.0 - r * p.s_top_f2) * p.kappa_2 * c.d.P_f2 / c[Var::K_f2] - p.delta_K - r);
  });
  force("f1", idx(RateVar::L_f1), &MacroParams::mu_fL1, [](const Context& c) {
    const auto& p = c.p;
    return c[Var::p_1] * (1.0 - c.d.r_f1 * p.s_top_f1) * p.l_1 * c.d.P_f1 / c.d.L_f1 -
           c[Var::w_1];
  });
  force("f2", idx(RateVar::L_f2), &MacroParams::mu_fL2, [](const Context& c) {
    const auto& p = c.p;
    return c[Var::p_2] * (1.0 - c.d.r_f2 * p.s_top_f2) * p.l_2 * c.d.P_f2 / c.d.L_f2 -
           c[Var::w_2];
  });
  force("f1", I(Var::A_21), &MacroParams::mu_fA1, [](const Context& c) {
    const auto& p = c.p;
    return c[Var::p_1] * (1.0 - c.d.r_f1 * p.s_top_f1) * (1.0 - p.kappa_1 - p.l_1) * c.d.P_f1 /
               c[Var::A_21] -
           c[Var::p_2];
  });
  force("f2", I(Var::A_12), &MacroParams::mu_fA2, [](const Context& c) {
    const auto& p = c.p;
    return c[Var::p_2] * (1.0 - c.d.r_f2 * p.s_top_f2) * (1.0 - p.kappa_2 - p.l_2) * c.d.P_f2 /
               c[Var::A_12] -
           c[Var::p_1];
  });
  // the inventory equation contains S_dot on both sides; solved for S_dot
  force("f1", I(Var::S_f1), &MacroParams::mu_fS1, [](const Context& c) {
    const auto& p = c.p;
    return (p.s_top_f1 * c.d.P_f1 - c[Var::S_f1]) / (1.0 + p.mu_fS1 * p.s_top_f1);
  });
  force("f2", I(Var::S_f2), &MacroParams::mu_fS2, [](const Context& c) {
    const auto& p = c.p;
    return (p.s_top_f2 * c.d.P_f2 - c[Var::S_f2]) / (1.0 + p.mu_fS2 * p.s_top_f2);
  });

  using Ctr = core::ConstraintDef<Context>;
  auto constant = [](double v) { return Fn([v](const Context&) { return v; }); };

  // budget constraints of the household sectors
  m.constraints.push_back(Ctr{
      "Z_a",
      [](const Context& c, std::span<const double> r) {
        const auto& p = c.p;
        const auto& d = c.d;
        return r[idx(Var::M_a)] + c[Var::p_1] * c[Var::C_a1] + c[Var::p_2] * c[Var::C_a2] -
               (1.0 - p.theta) * (c[Var::w_1] * c[Var::L_a1] + c[Var::w_2] * c[Var::L_a2]) -
               p.e_a * (d.pi_f1 + d.pi_f2 + d.pi_bank) - d.r_M * c[Var::M_a];
      },
      {{I(Var::M_a), constant(1.0)},
       {I(Var::L_a1), [](const Context& c) { return -(1.0 - c.p.theta) * c[Var::w_1]; }},
       {I(Var::L_a2), [](const Context& c) { return -(1.0 - c.p.theta) * c[Var::w_2]; }},
       {I(Var::C_a1), [](const Context& c) { return c[Var::p_1]; }},
       {I(Var::C_a2), [](const Context& c) { return c[Var::p_2]; }}},
      {I(Var::M_a)}});
  m.constraints.push_back(Ctr{
      "Z_b",
      [](const Context& c, std::span<const double> r) {
        const auto& p = c.p;
        const auto& d = c.d;
        return r[idx(Var::M_b)] + c[Var::p_1] * c[Var::C_b1] + c[Var::p_2] * c[Var::C_b2] -
               (1.0 - p.theta) * (c[Var::w_1] * c[Var::L_b1] + c[Var::w_2] * c[Var::L_b2]) -
               (1.0 - p.e_a) * (d.pi_f1 + d.pi_f2 + d.pi_bank) - d.r_M * c[Var::M_b];
      },
      {{I(Var::M_b), constant(1.0)},
       {I(Var::L_b1), [](const Context& c) { return -(1.0 - c.p.theta) * c[Var::w_1]; }},
       {I(Var::L_b2), [](const Context& c) { return -(1.0 - c.p.theta) * c[Var::w_2]; }},
       {I(Var::C_b1), [](const Context& c) { return c[Var::p_1]; }},
       {I(Var::C_b2), [](const Context& c) { return c[Var::p_2]; }}},
      {I(Var::M_b)}});
  m.constraints.push_back(Ctr{
      "Z_g",
      [](const Context& c, std::span<const double> r) {
        return c[Var::p_1] * c[Var::G_g1] + c[Var::p_2] * c[Var::G_g2] - (c.d.T_a + c.d.T_b) +
               c[Var::r_g] * c.d.D_g - r[idx(RateVar::D_g)];
      },
      {{idx(RateVar::D_g), constant(-1.0)},
       {I(Var::G_g1), [](const Context& c) { return c[Var::p_1]; }},
       {I(Var::G_g2), [](const Context& c) { return c[Var::p_2]; }}},
      {idx(RateVar::D_g)}});

  // labor flows
  m.constraints.push_back(Ctr{
      "Z_L1",
      [](const Context&, std::span<const double> r) {
        return r[idx(Var::L_a1)] + r[idx(Var::L_b1)] - r[idx(RateVar::L_f1)];
      },
      {{I(Var::L_a1), constant(1.0)},
       {I(Var::L_b1), constant(1.0)},
       {idx(RateVar::L_f1), constant(-1.0)}},
      {I(Var::L_a1), I(Var::L_b1), idx(RateVar::L_f1)}});
  m.constraints.push_back(Ctr{
      "Z_L2",
      [](const Context&, std::span<const double> r) {
        return r[idx(Var::L_a2)] + r[idx(Var::L_b2)] - r[idx(RateVar::L_f2)];
      },
      {{I(Var::L_a2), constant(1.0)},
       {I(Var::L_b2), constant(1.0)},
       {idx(RateVar::L_f2), constant(-1.0)}},
      {I(Var::L_a2), I(Var::L_b2), idx(RateVar::L_f2)}});

  // goods flows
  m.constraints.push_back(Ctr{
      "Z_P1",
      [](const Context& c, std::span<const double> r) {
        return c.d.P_f1 - r[idx(Var::K_f1)] - c.p.delta_K * c[Var::K_f1] - c[Var::C_a1] -
               c[Var::C_b1] - c[Var::G_g1] - r[idx(Var::S_f1)] - c[Var::A_12];
      },
      {{I(Var::C_a1), constant(-1.0)},
       {I(Var::C_b1), constant(-1.0)},
       {I(Var::G_g1), constant(-1.0)},
       {I(Var::A_12), constant(-1.0)},
       {I(Var::K_f1), [](const Context& c) { return c.p.kappa_1 * c.d.P_f1 / c[Var::K_f1]; }},
       {idx(RateVar::L_f1), [](const Context& c) { return c.p.l_1 * c.d.P_f1 / c.d.L_f1; }},
       {I(Var::A_21),
        [](const Context& c) { return (1.0 - c.p.kappa_1 - c.p.l_1) * c.d.P_f1; }},
       {I(Var::S_f1),
        [](const Context& c) { return -1.0 / (1.0 + c.p.mu_fS1 * c.p.s_top_f1); }}},
      {I(Var::K_f1), I(Var::S_f1)}});
  m.constraints.push_back(Ctr{
      "Z_P2",
      [](const Context& c, std::span<const double> r) {
        return c.d.P_f2 - r[idx(Var::K_f2)] - c.p.delta_K * c[Var::K_f2] - c[Var::C_a2] -
               c[Var::C_b2] - c[Var::G_g2] - r[idx(Var::S_f2)] - c[Var::A_21];
      },
      {{I(Var::C_a2), constant(-1.0)},
       {I(Var::C_b2), constant(-1.0)},
       {I(Var::G_g2), constant(-1.0)},
       {I(Var::A_21), constant(-1.0)},
       {I(Var::K_f2), [](const Context& c) { return c.p.kappa_2 * c.d.P_f2 / c[Var::K_f2]; }},
       {idx(RateVar::L_f2), [](const Context& c) { return c.p.l_2 * c.d.P_f2 / c.d.L_f2; }},
       {I(Var::A_12),
        [](const Context& c) { return (1.0 - c.p.kappa_2 - c.p.l_2) * c.d.P_f2; }},
       {I(Var::S_f2),
        [](const Context& c) { return -1.0 / (1.0 + c.p.mu_fS2 * c.p.s_top_f2); }}},
      {I(Var::K_f2), I(Var::S_f2)}});

  // prices, wages and interest follow the multipliers; credit finances
  // investment and inventories
  using Rule = core::RateRule<Context>;
  using Sp = std::span<const double>;
  const auto L = [](Multiplier mm) { return idx(mm); };
  m.rate_rules.push_back(Rule{I(Var::p_1), [L](const Context& c, Sp, Sp lam) {
                                return c.p.mu_p1 * lam[L(Multiplier::P1)];
                              }});
  m.rate_rules.push_back(Rule{I(Var::p_2), [L](const Context& c, Sp, Sp lam) {
                                return c.p.mu_p2 * lam[L(Multiplier::P2)];
                              }});
  m.rate_rules.push_back(Rule{I(Var::w_1), [L](const Context& c, Sp, Sp lam) {
                                return c.p.mu_w * lam[L(Multiplier::L1)];
                              }});
  m.rate_rules.push_back(Rule{I(Var::w_2), [L](const Context& c, Sp, Sp lam) {
                                return c.p.mu_w * lam[L(Multiplier::L2)];
                              }});
  m.rate_rules.push_back(Rule{I(Var::r_g), [](const Context& c, Sp r, Sp) {
                                const double inflation =
                                    (r[idx(Var::p_1)] / c[Var::p_1] + r[idx(Var::p_2)] / c[Var::p_2]) / 2.0;
                                return c.p.mu_r * (inflation - c.p.rho_top);
                              }});
  m.rate_rules.push_back(Rule{I(Var::D_f1), [](const Context& c, Sp r, Sp) {
                                return c[Var::p_1] * (r[idx(Var::K_f1)] + r[idx(Var::S_f1)]);
                              }});
  m.rate_rules.push_back(Rule{I(Var::D_f2), [](const Context& c, Sp r, Sp) {
                                return c[Var::p_2] * (r[idx(Var::K_f2)] + r[idx(Var::S_f2)]);
                              }});

  m.validate();
  return m;
}

}  // namespace

std::span<const DependentField> dependent_fields() { return kDependentFields; }
std::span<const UtilityField> utility_fields() { return kUtilityFields; }

std::array<double, kNumFree> Evaluation::free_rates() const {
  std::array<double, kNumFree> out{};
  for (std::size_t i = 0; i < kNumFree; ++i) out[i] = rates[i];
  return out;
}

DependentQuantities dependents(const MacroState& s, const MacroParams& p) {
  DependentQuantities d;
  d.L_f1 = s[Var::L_a1] + s[Var::L_b1];
  d.L_f2 = s[Var::L_a2] + s[Var::L_b2];
  d.T_a = p.theta * (s[Var::w_1] * s[Var::L_a1] + s[Var::w_2] * s[Var::L_a2]);
  d.T_b = p.theta * (s[Var::w_1] * s[Var::L_b1] + s[Var::w_2] * s[Var::L_b2]);
  d.r_f1 = s[Var::r_g] + p.r_f1_offset;
  d.r_f2 = s[Var::r_g] + p.r_f2_offset;
  d.r_M = s[Var::r_g] + p.r_M_offset;
  d.P_f1 = production(s[Var::K_f1], d.L_f1, s[Var::A_21], p.kappa_1, p.l_1);
  d.P_f2 = production(s[Var::K_f2], d.L_f2, s[Var::A_12], p.kappa_2, p.l_2);
  d.E_f1 = s[Var::p_1] * (s[Var::K_f1] + s[Var::S_f1]) - s[Var::D_f1];
  d.E_f2 = s[Var::p_2] * (s[Var::K_f2] + s[Var::S_f2]) - s[Var::D_f2];
  d.E_bank = 0.0;
  d.D_g = s[Var::M_a] + s[Var::M_b] + d.E_bank - s[Var::D_f1] - s[Var::D_f2];
  const double equity = d.E_f1 + d.E_f2 + d.E_bank;
  d.V_a = s[Var::M_a] + p.e_a * equity;
  d.V_b = s[Var::M_b] + (1.0 - p.e_a) * equity;
  d.V_g = -d.D_g;
  d.pi_f1 = s[Var::p_1] * d.P_f1 - s[Var::p_1] * p.delta_K * s[Var::K_f1] -
            s[Var::p_2] * s[Var::A_21] - s[Var::w_1] * d.L_f1 - d.r_f1 * s[Var::D_f1];
  d.pi_f2 = s[Var::p_2] * d.P_f2 - s[Var::p_2] * p.delta_K * s[Var::K_f2] -
            s[Var::p_1] * s[Var::A_12] - s[Var::w_2] * d.L_f2 - d.r_f2 * s[Var::D_f2];
  d.pi_bank = d.r_f1 * s[Var::D_f1] + d.r_f2 * s[Var::D_f2] + s[Var::r_g] * d.D_g -
              d.r_M * (s[Var::M_a] + s[Var::M_b]);
  return d;
}

Model build_model(const MacroParams& params) {
  validate(params);
  return assemble([params](double) { return params; });
}

Model build_model(ParamsAt params_at) { return assemble(std::move(params_at)); }

void check_domain(const MacroState& s) {
  for (std::size_t i = 0; i < kNumFree; ++i) {
    if (!std::isfinite(s.values[i])) {
      throw DomainError(std::string(kRateNames[i]),
                        std::string(kRateNames[i]) + " is not finite");
    }
  }
  for (Var v : kPositive) {
    if (!(s[v] > 0.0)) {
      throw DomainError(std::string(name(v)), std::string(name(v)) + " must be positive");
    }
  }
  if (!(s[Var::w_1] > 0.0)) throw DomainError("w_1", "w_1 must be positive");
  if (!(s[Var::w_2] > 0.0)) throw DomainError("w_2", "w_2 must be positive");
  if (!(1.0 - s[Var::L_a1] - s[Var::L_a2] > 0.0)) {
    throw DomainError("leisure_a", "leisure of household a must be positive");
  }
  if (!(1.0 - s[Var::L_b1] - s[Var::L_b2] > 0.0)) {
    throw DomainError("leisure_b", "leisure of household b must be positive");
  }
}

std::vector<std::string> validate_state(const MacroState& s, const MacroParams& p) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kNumFree; ++i) {
    if (!std::isfinite(s.values[i])) out.push_back(std::string(kRateNames[i]) + " is not finite");
  }
  for (Var v : kPositive) {
    if (!(s[v] > 0.0)) out.push_back(std::string(name(v)) + " must be positive");
  }
  for (Var v : {Var::w_1, Var::w_2}) {
    if (!(s[v] > 0.0)) out.push_back(std::string(name(v)) + " must be positive");
  }
  if (!(1.0 - s[Var::L_a1] - s[Var::L_a2] > 0.0)) {
    out.push_back("L_a1 + L_a2 must stay below 1 (leisure of household a)");
  }
  if (!(1.0 - s[Var::L_b1] - s[Var::L_b2] > 0.0)) {
    out.push_back("L_b1 + L_b2 must stay below 1 (leisure of household b)");
  }
  const auto d = dependents(s, p);
  if (d.E_bank != 0.0) out.push_back("E_bank must be zero");
  return out;
}

bool admissible(const MacroState& s, const MacroParams& p) {
  if (!validate_state(s, p).empty()) return false;
  const auto d = dependents(s, p);
  return d.E_f1 > 0.0 && d.E_f2 > 0.0;
}

MacroState perturb(const MacroState& base, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  MacroState x = base;
  for (auto& v : x.values) v *= std::exp(sigma * z(rng));
  return x;
}

Evaluation evaluate(const Model& model, const MacroState& s, double t) {
  const auto ep = core::ex_post_derivative(model, s.span(), t);
  Evaluation ev;
  for (std::size_t i = 0; i < kNumRates; ++i) ev.rates[i] = ep.rates[i];
  for (std::size_t k = 0; k < kNumMultipliers; ++k) ev.lambdas[k] = ep.multipliers.lambdas[k];
  ev.condition = ep.multipliers.condition;
  return ev;
}

std::array<double, kNumMultipliers> lagrangian_residuals(const MacroState& s,
                                                         const MacroParams& p,
                                                         std::span<const double> rates) {
  const auto model = build_model(p);
  const auto ctx = model.prepare(s.span(), 0.0);
  const auto z = core::constraint_residuals(model, ctx, rates);
  std::array<double, kNumMultipliers> out{};
  for (std::size_t k = 0; k < kNumMultipliers; ++k) out[k] = z[k];
  return out;
}

std::array<double, 6> budget_residuals(const MacroState& s, const MacroParams& p,
                                       std::span<const double> r) {
  const auto d = dependents(s, p);
  const double profits = d.pi_f1 + d.pi_f2 + d.pi_bank;
  const double w1 = s[Var::w_1], w2 = s[Var::w_2], p1 = s[Var::p_1], p2 = s[Var::p_2];
  std::array<double, 6> z{};
  z[0] = r[idx(Var::M_a)] + p1 * s[Var::C_a1] + p2 * s[Var::C_a2] -
         (1.0 - p.theta) * (w1 * s[Var::L_a1] + w2 * s[Var::L_a2]) - p.e_a * profits -
         d.r_M * s[Var::M_a];
  z[1] = r[idx(Var::M_b)] + p1 * s[Var::C_b1] + p2 * s[Var::C_b2] -
         (1.0 - p.theta) * (w1 * s[Var::L_b1] + w2 * s[Var::L_b2]) - (1.0 - p.e_a) * profits -
         d.r_M * s[Var::M_b];
  z[2] = p1 * s[Var::G_g1] + p2 * s[Var::G_g2] -
         p.theta * (w1 * s[Var::L_a1] + w2 * s[Var::L_a2] + w1 * s[Var::L_b1] +
                    w2 * s[Var::L_b2]) +
         s[Var::r_g] * d.D_g - r[idx(RateVar::D_g)];
  z[3] = w1 * d.L_f1 + p2 * s[Var::A_21] + d.r_f1 * s[Var::D_f1] -
         p1 * (s[Var::C_a1] + s[Var::C_b1] + s[Var::G_g1] + s[Var::A_12]) + d.pi_f1 -
         r[idx(Var::D_f1)];
  z[4] = w2 * d.L_f2 + p1 * s[Var::A_12] + d.r_f2 * s[Var::D_f2] -
         p2 * (s[Var::C_a2] + s[Var::C_b2] + s[Var::G_g2] + s[Var::A_21]) + d.pi_f2 -
         r[idx(Var::D_f2)];
  const double e_bank_rate = 0.0;
  z[5] = d.r_M * (s[Var::M_a] + s[Var::M_b]) - d.r_f1 * s[Var::D_f1] - d.r_f2 * s[Var::D_f2] -
         s[Var::r_g] * d.D_g + d.pi_bank + e_bank_rate;
  return z;
}

double bank_balance_rate(std::span<const double> r) {
  return r[idx(Var::D_f1)] + r[idx(Var::D_f2)] + r[idx(RateVar::D_g)] - r[idx(Var::M_a)] -
         r[idx(Var::M_b)];
}

double household_a_utility(const MacroState& s, const MacroParams& p) {
  return std::pow(s[Var::C_a1], p.alpha_C1) * std::pow(s[Var::C_a2], p.alpha_C2) +
         std::pow(1.0 - s[Var::L_a1] - s[Var::L_a2], p.alpha_L) +
         std::pow(s[Var::G_g1], p.alpha_G1);
}

double household_b_utility(const MacroState& s, const MacroParams& p) {
  return std::pow(s[Var::C_b1], p.beta_C1) * std::pow(s[Var::C_b2], p.beta_C2) +
         std::pow(1.0 - s[Var::L_b1] - s[Var::L_b2], p.beta_L) +
         std::pow(s[Var::G_g2], p.beta_G2);
}

double firm_utility(int sector, double K, double L, double A, const MacroState& s,
                    const MacroParams& p, double inventory_rate) {
  const auto d = dependents(s, p);
  if (sector == 1) {
    const double P = production(K, L, A, p.kappa_1, p.l_1);
    const double p1 = s[Var::p_1];
    return p1 * P - p1 * p.delta_K * K - s[Var::p_2] * A - s[Var::w_1] * L -
           d.r_f1 * p1 * (K + p.s_top_f1 * (P - inventory_rate));
  }
  const double P = production(K, L, A, p.kappa_2, p.l_2);
  const double p2 = s[Var::p_2];
  return p2 * P - p2 * p.delta_K * K - s[Var::p_1] * A - s[Var::w_2] * L -
         d.r_f2 * p2 * (K + p.s_top_f2 * (P - inventory_rate));
}

UtilityRecord utilities(const MacroState& s, const MacroParams& p, const Evaluation& ev) {
  check_domain(s);
  const auto d = dependents(s, p);
  UtilityRecord u;
  const double la = 1.0 - s[Var::L_a1] - s[Var::L_a2];
  const double lb = 1.0 - s[Var::L_b1] - s[Var::L_b2];
  const double p1 = s[Var::p_1], p2 = s[Var::p_2], w1 = s[Var::w_1], w2 = s[Var::w_2];

  u.U_a = household_a_utility(s, p);
  u.U_b = household_b_utility(s, p);
  u.U_g = d.D_g > 0.0 ? -(p.gamma_D + p.gamma_r * s[Var::r_g]) * d.D_g * d.D_g / ((p1 + p2) / 2.0)
                      : 0.0;
  u.U_f1 = firm_utility(1, s[Var::K_f1], d.L_f1, s[Var::A_21], s, p, ev.rate(Var::S_f1));
  u.U_f2 = firm_utility(2, s[Var::K_f2], d.L_f2, s[Var::A_12], s, p, ev.rate(Var::S_f2));

  const double mu_la = p.alpha_L * std::pow(la, p.alpha_L - 1.0);
  const double mu_lb = p.beta_L * std::pow(lb, p.beta_L - 1.0);
  u.a_C1 = p.alpha_C1 * std::pow(s[Var::C_a1], p.alpha_C1 - 1.0) *
           std::pow(s[Var::C_a2], p.alpha_C2) / p1;
  u.a_C2 = p.alpha_C2 * std::pow(s[Var::C_a1], p.alpha_C1) *
           std::pow(s[Var::C_a2], p.alpha_C2 - 1.0) / p2;
  u.a_L1 = mu_la / ((1.0 - p.theta) * w1);
  u.a_L2 = mu_la / ((1.0 - p.theta) * w2);
  u.b_C1 = p.beta_C1 * std::pow(s[Var::C_b1], p.beta_C1 - 1.0) *
           std::pow(s[Var::C_b2], p.beta_C2) / p1;
  u.b_C2 = p.beta_C2 * std::pow(s[Var::C_b1], p.beta_C1) *
           std::pow(s[Var::C_b2], p.beta_C2 - 1.0) / p2;
  u.b_L1 = mu_lb / ((1.0 - p.theta) * w1);
  u.b_L2 = mu_lb / ((1.0 - p.theta) * w2);

  const double net1 = 1.0 - d.r_f1 * p.s_top_f1;
  const double net2 = 1.0 - d.r_f2 * p.s_top_f2;
  u.f1_K = net1 * p.kappa_1 * d.P_f1 / s[Var::K_f1] / (d.r_f1 + p.delta_K);
  u.f1_L = p1 * net1 * p.l_1 * d.P_f1 / d.L_f1 / w1;
  u.f1_A = p1 * net1 * (1.0 - p.kappa_1 - p.l_1) * d.P_f1 / s[Var::A_21] / p2;
  u.f2_K = net2 * p.kappa_2 * d.P_f2 / s[Var::K_f2] / (d.r_f2 + p.delta_K);
  u.f2_L = p2 * net2 * p.l_2 * d.P_f2 / d.L_f2 / w2;
  u.f2_A = p2 * net2 * (1.0 - p.kappa_2 - p.l_2) * d.P_f2 / s[Var::A_12] / p1;
  return u;
}

UtilityRecord utilities(const MacroState& s, const MacroParams& p) {
  const auto model = build_model(p);
  return utilities(s, p, evaluate(model, s));
}

}  // namespace gcd::macro
