#include "gcd/macro/params.hpp"

#include <array>
#include <cmath>
#include <tuple>

#include "gcd/errors.hpp"

namespace gcd::macro {

std::optional<Var> var_from_name(std::string_view n) {
  for (std::size_t i = 0; i < kNumFree; ++i) {
    if (kRateNames[i] == n) return static_cast<Var>(i);
  }
  return std::nullopt;
}

MacroState MacroState::from(std::span<const double> x) {
  MacroState s;
  for (std::size_t i = 0; i < kNumFree; ++i) s.values[i] = x[i];
  return s;
}

namespace {

#define GCD_FIELD(f) ParamField{#f, &MacroParams::f}
constexpr std::array kParamFields = {
    GCD_FIELD(alpha_L),     GCD_FIELD(alpha_C1),    GCD_FIELD(alpha_C2),
    GCD_FIELD(alpha_G1),    GCD_FIELD(beta_L),      GCD_FIELD(beta_C1),
    GCD_FIELD(beta_C2),     GCD_FIELD(beta_G2),     GCD_FIELD(alpha_r),
    GCD_FIELD(rho_a),       GCD_FIELD(beta_r),      GCD_FIELD(rho_b),
    GCD_FIELD(e_a),         GCD_FIELD(gamma_D),     GCD_FIELD(gamma_r),
    GCD_FIELD(theta),       GCD_FIELD(rho_top),     GCD_FIELD(kappa_1),
    GCD_FIELD(kappa_2),     GCD_FIELD(l_1),         GCD_FIELD(l_2),
    GCD_FIELD(delta_K),     GCD_FIELD(s_top_f1),    GCD_FIELD(s_top_f2),
    GCD_FIELD(mu_aL1),      GCD_FIELD(mu_aL2),      GCD_FIELD(mu_aC1),
    GCD_FIELD(mu_aC2),      GCD_FIELD(mu_aM),       GCD_FIELD(mu_aG1),
    GCD_FIELD(mu_bL1),      GCD_FIELD(mu_bL2),      GCD_FIELD(mu_bC1),
    GCD_FIELD(mu_bC2),      GCD_FIELD(mu_bM),       GCD_FIELD(mu_bG2),
    GCD_FIELD(mu_abC),      GCD_FIELD(mu_baC),      GCD_FIELD(mu_gD),
    GCD_FIELD(mu_fK1),      GCD_FIELD(mu_fK2),      GCD_FIELD(mu_fL1),
    GCD_FIELD(mu_fL2),      GCD_FIELD(mu_fA1),      GCD_FIELD(mu_fA2),
    GCD_FIELD(mu_fS1),      GCD_FIELD(mu_fS2),      GCD_FIELD(mu_p1),
    GCD_FIELD(mu_p2),       GCD_FIELD(mu_w),        GCD_FIELD(mu_r),
    GCD_FIELD(r_f1_offset), GCD_FIELD(r_f2_offset), GCD_FIELD(r_M_offset),
};
#undef GCD_FIELD

#define GCD_INIT(f) InitialField{#f, &InitialConditions::f}
constexpr std::array kInitialFields = {
    GCD_INIT(G_g1), GCD_INIT(G_g2), GCD_INIT(L_a1), GCD_INIT(L_a2), GCD_INIT(C_a1),
    GCD_INIT(C_a2), GCD_INIT(M_a),  GCD_INIT(L_b1), GCD_INIT(L_b2), GCD_INIT(C_b1),
    GCD_INIT(C_b2), GCD_INIT(M_b),  GCD_INIT(K_f1), GCD_INIT(K_f2), GCD_INIT(A_12),
    GCD_INIT(A_21), GCD_INIT(S_f1), GCD_INIT(S_f2), GCD_INIT(E_f1), GCD_INIT(E_f2),
    GCD_INIT(w_1),  GCD_INIT(w_2),  GCD_INIT(p_1),  GCD_INIT(p_2),  GCD_INIT(r_g),
    GCD_INIT(r_f1), GCD_INIT(r_f2), GCD_INIT(r_M),
};
#undef GCD_INIT

constexpr std::array<std::string_view, 23> kQuantityPowers = {
    "mu_aL1", "mu_aL2", "mu_aC1", "mu_aC2", "mu_aM",  "mu_aG1", "mu_bL1", "mu_bL2",
    "mu_bC1", "mu_bC2", "mu_bM",  "mu_bG2", "mu_gD",  "mu_fK1", "mu_fK2", "mu_fL1",
    "mu_fL2", "mu_fA1", "mu_fA2", "mu_fS1", "mu_fS2", "mu_abC", "mu_baC"};

}  // namespace

std::span<const ParamField> param_fields() { return kParamFields; }
std::span<const InitialField> initial_fields() { return kInitialFields; }

std::optional<double MacroParams::*> param_member(std::string_view name) {
  for (const auto& f : kParamFields) {
    if (f.name == name) return f.member;
  }
  return std::nullopt;
}

double get_param(const MacroParams& p, std::string_view name) {
  auto m = param_member(name);
  if (!m) throw ConfigError(std::string(name), "unknown parameter '" + std::string(name) + "'");
  return p.**m;
}

void set_param(MacroParams& p, std::string_view name, double value) {
  auto m = param_member(name);
  if (!m) throw ConfigError(std::string(name), "unknown parameter '" + std::string(name) + "'");
  p.**m = value;
}

std::span<const std::string_view> quantity_power_names() {
  // includes the social-influence powers of the conspicuous variant
  return kQuantityPowers;
}

std::vector<std::string_view> price_power_names(bool include_mu_r) {
  std::vector<std::string_view> out = {"mu_p1", "mu_p2", "mu_w"};
  if (include_mu_r) out.push_back("mu_r");
  return out;
}

MacroParams scale_powers(MacroParams p, double price_scale, double quantity_scale,
                         bool include_mu_r) {
  for (auto n : quantity_power_names()) set_param(p, n, get_param(p, n) * quantity_scale);
  for (auto n : price_power_names(include_mu_r)) set_param(p, n, get_param(p, n) * price_scale);
  return p;
}

void validate(const MacroParams& p) {
  auto fail = [](std::string_view key, const std::string& why) {
    throw ConfigError(std::string(key), "invalid parameter '" + std::string(key) + "': " + why);
  };
  for (const auto& f : kParamFields) {
    if (!std::isfinite(p.*f.member)) fail(f.name, "not finite");
  }
  if (!(p.theta >= 0.0 && p.theta < 1.0)) fail("theta", "must lie in [0, 1)");
  if (!(p.e_a >= 0.0 && p.e_a <= 1.0)) fail("e_a", "must lie in [0, 1]");
  for (auto n : {"alpha_L", "alpha_C1", "alpha_C2", "alpha_G1", "beta_L", "beta_C1", "beta_C2",
                 "beta_G2"}) {
    const double v = get_param(p, n);
    if (!(v > 0.0 && v < 1.0)) fail(n, "utility exponent must lie in (0, 1)");
  }
  for (auto [k, l, kn] : {std::tuple{p.kappa_1, p.l_1, "kappa_1"},
                          std::tuple{p.kappa_2, p.l_2, "kappa_2"}}) {
    if (!(k > 0.0 && l > 0.0 && k + l < 1.0)) fail(kn, "requires kappa > 0, l > 0, kappa + l < 1");
  }
  if (!(p.delta_K >= 0.0)) fail("delta_K", "must be non-negative");
  if (!(p.s_top_f1 >= 0.0)) fail("s_top_f1", "must be non-negative");
  if (!(p.s_top_f2 >= 0.0)) fail("s_top_f2", "must be non-negative");
  for (const auto& f : kParamFields) {
    if (f.name.starts_with("mu_") && p.*f.member < 0.0) fail(f.name, "power factors must be >= 0");
  }
}

MacroState to_state(const InitialConditions& ic) {
  MacroState s;
  s[Var::K_f1] = ic.K_f1;
  s[Var::K_f2] = ic.K_f2;
  s[Var::L_a1] = ic.L_a1;
  s[Var::L_a2] = ic.L_a2;
  s[Var::L_b1] = ic.L_b1;
  s[Var::L_b2] = ic.L_b2;
  s[Var::C_a1] = ic.C_a1;
  s[Var::C_a2] = ic.C_a2;
  s[Var::C_b1] = ic.C_b1;
  s[Var::C_b2] = ic.C_b2;
  s[Var::G_g1] = ic.G_g1;
  s[Var::G_g2] = ic.G_g2;
  s[Var::r_g] = ic.r_g;
  s[Var::w_1] = ic.w_1;
  s[Var::w_2] = ic.w_2;
  s[Var::p_1] = ic.p_1;
  s[Var::p_2] = ic.p_2;
  s[Var::S_f1] = ic.S_f1;
  s[Var::S_f2] = ic.S_f2;
  s[Var::M_a] = ic.M_a;
  s[Var::M_b] = ic.M_b;
  s[Var::D_f1] = ic.p_1 * (ic.K_f1 + ic.S_f1) - ic.E_f1;
  s[Var::D_f2] = ic.p_2 * (ic.K_f2 + ic.S_f2) - ic.E_f2;
  s[Var::A_12] = ic.A_12;
  s[Var::A_21] = ic.A_21;
  return s;
}

void apply_rate_offsets(const InitialConditions& ic, MacroParams& p) {
  p.r_f1_offset = ic.r_f1 - ic.r_g;
  p.r_f2_offset = ic.r_f2 - ic.r_g;
  p.r_M_offset = ic.r_M - ic.r_g;
}

}  // namespace gcd::macro
