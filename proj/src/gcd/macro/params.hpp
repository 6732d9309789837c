#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcd/macro/state.hpp"

namespace gcd::macro {

/// Every parameter and power factor of the six-sector model. Defaults are
/// the published baseline calibration.
struct MacroParams {
  // household utility and saving
  double alpha_L = 0.4, alpha_C1 = 0.2, alpha_C2 = 0.25, alpha_G1 = 0.5;
  double beta_L = 0.4, beta_C1 = 0.25, beta_C2 = 0.2, beta_G2 = 0.5;
  double alpha_r = 4.0, rho_a = 0.06, beta_r = 4.0, rho_b = 0.06;
  double e_a = 0.2;
  // government and central bank
  double gamma_D = 0.5, gamma_r = 0.0, theta = 0.2, rho_top = 0.0;
  // technology
  double kappa_1 = 0.25, kappa_2 = 0.3, l_1 = 0.7, l_2 = 0.55;
  double delta_K = 0.05, s_top_f1 = 0.1, s_top_f2 = 0.1;
  // power factors: households
  double mu_aL1 = 2, mu_aL2 = 2, mu_aC1 = 2, mu_aC2 = 2, mu_aM = 2, mu_aG1 = 2;
  double mu_bL1 = 2, mu_bL2 = 2, mu_bC1 = 2, mu_bC2 = 2, mu_bM = 2, mu_bG2 = 2;
  double mu_abC = 1, mu_baC = 1;
  // government
  double mu_gD = 2;
  // firms
  double mu_fK1 = 1, mu_fK2 = 1, mu_fL1 = 2, mu_fL2 = 2;
  double mu_fA1 = 2, mu_fA2 = 2, mu_fS1 = 2, mu_fS2 = 2;
  // price development
  double mu_p1 = 50, mu_p2 = 50, mu_w = 50, mu_r = 20;
  // lockstep interest-rate offsets relative to r_g
  double r_f1_offset = 0.0, r_f2_offset = 0.0, r_M_offset = -0.001;

  bool conspicuous = false;
};

struct ParamField {
  std::string_view name;
  double MacroParams::*member;
};

/// All real-valued fields by canonical name.
std::span<const ParamField> param_fields();
std::optional<double MacroParams::*> param_member(std::string_view name);

double get_param(const MacroParams& p, std::string_view name);
void set_param(MacroParams& p, std::string_view name, double value);

/// Power factors scaled by the quantity axis of the stability map.
std::span<const std::string_view> quantity_power_names();
/// Power factors scaled by the price axis (mu_r included when requested).
std::vector<std::string_view> price_power_names(bool include_mu_r = true);

MacroParams scale_powers(MacroParams p, double price_scale, double quantity_scale,
                         bool include_mu_r = true);

/// Throws ConfigError naming the first invalid field.
void validate(const MacroParams& p);

/// Initial conditions in the published form: equity is given, credit follows
/// from the firm balance sheets; r_f1, r_f2 and r_M fix the lockstep offsets.
struct InitialConditions {
  double G_g1 = 0.05, G_g2 = 0.02;
  double L_a1 = 0.06, L_a2 = 0.21, C_a1 = 0.15, C_a2 = 0.11, M_a = 0.45;
  double L_b1 = 0.11, L_b2 = 0.19, C_b1 = 0.13, C_b2 = 0.08, M_b = 0.74;
  double K_f1 = 0.72, K_f2 = 0.68, A_12 = 0.02, A_21 = 0.01;
  double S_f1 = 0.21, S_f2 = 0.09, E_f1 = 1.07, E_f2 = 1.71;
  double w_1 = 1.50, w_2 = 1.60, p_1 = 1.94, p_2 = 2.49;
  double r_g = 0.05, r_f1 = 0.05, r_f2 = 0.05, r_M = 0.049;
};

struct InitialField {
  std::string_view name;
  double InitialConditions::*member;
};
std::span<const InitialField> initial_fields();

MacroState to_state(const InitialConditions& ic);
/// Writes the offsets implied by the initial interest rates into `p`.
void apply_rate_offsets(const InitialConditions& ic, MacroParams& p);

inline MacroState baseline_state() { return to_state(InitialConditions{}); }

}  // namespace gcd::macro
