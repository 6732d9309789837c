#pragma once

#include <array>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gcd/core.hpp"
#include "gcd/macro/params.hpp"
#include "gcd/macro/state.hpp"

namespace gcd::macro {

/// The 17 constraint-determined quantities plus the two production levels.
struct DependentQuantities {
  double L_f1 = 0, L_f2 = 0;
  double T_a = 0, T_b = 0;
  double r_f1 = 0, r_f2 = 0, r_M = 0;
  double E_f1 = 0, E_f2 = 0, E_bank = 0;
  double V_a = 0, V_b = 0, V_g = 0;
  double D_g = 0;
  double pi_f1 = 0, pi_f2 = 0, pi_bank = 0;
  double P_f1 = 0, P_f2 = 0;
};

struct DependentField {
  std::string_view name;
  double DependentQuantities::*member;
};
std::span<const DependentField> dependent_fields();

DependentQuantities dependents(const MacroState& s, const MacroParams& p);

/// Per-point evaluation context handed to every force, coefficient and
/// constraint of the macro model.
struct Context {
  MacroParams p;
  double t = 0;
  MacroState x;
  DependentQuantities d;
  double leisure_a = 0, leisure_b = 0;

  double operator[](Var v) const { return x[v]; }
};

using Model = core::ModelDefinition<Context>;
using ParamsAt = std::function<MacroParams(double)>;

/// The six-sector economy with constant parameters.
Model build_model(const MacroParams& params);
/// Same structure; parameters are re-evaluated at every point in time.
Model build_model(ParamsAt params_at);

/// Throws DomainError naming the first variable outside the feasible region.
void check_domain(const MacroState& s);

/// Every MacroState invariant that fails, one message per violation.
std::vector<std::string> validate_state(const MacroState& s, const MacroParams& p);

/// validate_state passes and both firms hold positive equity.
bool admissible(const MacroState& s, const MacroParams& p);

/// Every free variable multiplied by exp(sigma * z), z standard normal.
MacroState perturb(const MacroState& base, double sigma, std::mt19937_64& rng);

/// Result of one ex-post evaluation of the macro model.
struct Evaluation {
  std::array<double, kNumRates> rates{};
  std::array<double, kNumMultipliers> lambdas{};
  double condition = 1.0;

  double rate(Var v) const { return rates[idx(v)]; }
  double rate(RateVar v) const { return rates[idx(v)]; }
  double lambda(Multiplier m) const { return lambdas[idx(m)]; }
  std::array<double, kNumFree> free_rates() const;
};

Evaluation evaluate(const Model& model, const MacroState& s, double t = 0.0);

/// Residuals of the seven Lagrangian constraints (Z_a, Z_b, Z_g, Z_L1, Z_L2,
/// Z_P1, Z_P2) for the given rates.
std::array<double, kNumMultipliers> lagrangian_residuals(const MacroState& s,
                                                         const MacroParams& p,
                                                         std::span<const double> rates);

/// The six budget-constraint residuals (Z_a, Z_b, Z_g, Z_f1, Z_f2, Z_bank).
/// E_bank stays at zero, so its rate is taken as zero.
std::array<double, 6> budget_residuals(const MacroState& s, const MacroParams& p,
                                       std::span<const double> rates);

/// Time derivative of the bank balance sheet D_f1 + D_f2 + D_g - M_a - M_b - E_bank.
double bank_balance_rate(std::span<const double> rates);

struct UtilityRecord {
  double U_a = 0, U_b = 0, U_g = 0, U_f1 = 0, U_f2 = 0;
  // marginal utility per unit price (household consumption) and marginal
  // disutility of labor per unit after-tax wage (household leisure)
  double a_C1 = 0, a_C2 = 0, a_L1 = 0, a_L2 = 0;
  double b_C1 = 0, b_C2 = 0, b_L1 = 0, b_L2 = 0;
  // value of marginal product net of inventory financing per unit cost
  double f1_K = 0, f1_L = 0, f1_A = 0;
  double f2_K = 0, f2_L = 0, f2_A = 0;
};

struct UtilityField {
  std::string_view name;
  double UtilityRecord::*member;
};
std::span<const UtilityField> utility_fields();

/// Utilities and marginal ratios; the inventory rates entering the firms'
/// expected profits are taken from the supplied ex-post evaluation.
UtilityRecord utilities(const MacroState& s, const MacroParams& p, const Evaluation& ev);
UtilityRecord utilities(const MacroState& s, const MacroParams& p);

/// Closed-form utility levels used by gradient checks.
double household_a_utility(const MacroState& s, const MacroParams& p);
double household_b_utility(const MacroState& s, const MacroParams& p);
/// Expected profit of sector 1/2 as a function of its inputs with the
/// inventory rate held fixed.
double firm_utility(int sector, double K, double L, double A, const MacroState& s,
                    const MacroParams& p, double inventory_rate);

}  // namespace gcd::macro
