#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace gcd::macro {

/// The 25 free variables, in the order used for the reduced Jacobian.
enum class Var : std::size_t {
  K_f1, K_f2,
  L_a1, L_a2, L_b1, L_b2,
  C_a1, C_a2, C_b1, C_b2,
  G_g1, G_g2,
  r_g,
  w_1, w_2,
  p_1, p_2,
  S_f1, S_f2,
  M_a, M_b,
  D_f1, D_f2,
  A_12, A_21,
};

inline constexpr std::size_t kNumFree = 25;

/// Rate variables of the constrained system: the free variables plus three
/// dependents whose rates carry forces of their own.
enum class RateVar : std::size_t { L_f1 = kNumFree, L_f2, D_g };
inline constexpr std::size_t kNumRates = kNumFree + 3;

inline constexpr std::array<std::string_view, kNumRates> kRateNames = {
    "K_f1", "K_f2", "L_a1", "L_a2", "L_b1", "L_b2", "C_a1", "C_a2", "C_b1", "C_b2",
    "G_g1", "G_g2", "r_g",  "w_1",  "w_2",  "p_1",  "p_2",  "S_f1", "S_f2", "M_a",
    "M_b",  "D_f1", "D_f2", "A_12", "A_21", "L_f1", "L_f2", "D_g"};

constexpr std::size_t idx(Var v) { return static_cast<std::size_t>(v); }
constexpr std::size_t idx(RateVar v) { return static_cast<std::size_t>(v); }

inline std::string_view name(Var v) { return kRateNames[idx(v)]; }
std::optional<Var> var_from_name(std::string_view name);

/// One point of the macro model's phase space (the free variables).
struct MacroState {
  std::array<double, kNumFree> values{};

  double& operator[](Var v) { return values[idx(v)]; }
  double operator[](Var v) const { return values[idx(v)]; }
  std::span<const double> span() const { return values; }
  static MacroState from(std::span<const double> x);
};

/// Labor swap between sectors across both households; neutral once w_1 = w_2.
inline std::array<double, kNumFree> labor_swap_direction() {
  std::array<double, kNumFree> v{};
  v[idx(Var::L_a1)] = 1.0;
  v[idx(Var::L_b2)] = 1.0;
  v[idx(Var::L_a2)] = -1.0;
  v[idx(Var::L_b1)] = -1.0;
  return v;
}

/// Credit shifted from firm 2 to firm 1; neutral while r_f1 = r_f2.
inline std::array<double, kNumFree> financing_swap_direction() {
  std::array<double, kNumFree> v{};
  v[idx(Var::D_f1)] = 1.0;
  v[idx(Var::D_f2)] = -1.0;
  return v;
}

/// Order of the Lagrangian multipliers.
enum class Multiplier : std::size_t { a, b, g, L1, L2, P1, P2 };
inline constexpr std::size_t kNumMultipliers = 7;
inline constexpr std::array<std::string_view, kNumMultipliers> kMultiplierNames = {
    "lambda_a", "lambda_b", "lambda_g", "lambda_L1", "lambda_L2", "lambda_P1", "lambda_P2"};
constexpr std::size_t idx(Multiplier m) { return static_cast<std::size_t>(m); }

}  // namespace gcd::macro
