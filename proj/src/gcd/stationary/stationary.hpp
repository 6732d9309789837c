#pragma once

#include <array>
#include <string>
#include <vector>

#include "gcd/macro/model.hpp"

namespace gcd::stationary {

struct StationaryState {
  macro::MacroState x;
  double lambda_a = 0, lambda_b = 0, lambda_g = 0;
  /// Largest |rate| over the 25 free variables at x.
  double residual = 0;
  int iterations = 0;
};

struct NewtonOptions {
  int max_iterations = 100;
  double tolerance = 1e-10;
  /// Iteration keeps going until this level or until no further progress.
  double target = 1e-13;
};

/// Coordinates along the family of fixed points. Money stocks are deflated
/// by p_1; the labor split is the position of L_a1 inside its feasible range.
struct FamilyPins {
  double labor_position = 0.5;
  double m_a = 0, m_b = 0, d_f1 = 0, d_f2 = 0;
};

/// Reads the family coordinates off any feasible state.
FamilyPins family_pins(const macro::MacroState& guess);

/// The variables held fixed by the Newton polish.
std::array<macro::Var, 5> pinned_variables();

/// The ex-post rates of the 25 free variables.
std::array<double, macro::kNumFree> stationarity_residual(const macro::MacroState& x,
                                                          const macro::MacroParams& p);

/// Fixed point from the stationary first-order conditions (firm input
/// choice, household and government optimality with equal power factors per
/// agent) with the money stocks and labor split set by `pins`. Throws
/// SolverError if the three-multiplier system has no feasible root.
macro::MacroState reduced_stationary(const macro::MacroParams& p, const FamilyPins& pins);

/// Gauss-Newton on x_dot = 0 with the pinned variables held at the values
/// in `start`. Throws SolverError on non-convergence.
StationaryState refine_stationary(const macro::MacroParams& p, const macro::MacroState& start,
                                  const NewtonOptions& opt = {});

/// reduced_stationary at the guess's family coordinates, then
/// refine_stationary. Throws ModelError when rho_a != rho_b.
StationaryState solve_stationary(const macro::MacroParams& p, const macro::MacroState& guess,
                                 const NewtonOptions& opt = {});

struct Check {
  std::string name;
  double value = 0;      // residual, relative where noted in the name
  double tolerance = 0;
  bool pass = false;
};

struct VerificationReport {
  std::vector<Check> checks;
  bool all_pass() const;
  const Check* find(const std::string& name) const;
};

VerificationReport verify_stationary(const StationaryState& ss, const macro::MacroParams& p);

/// The state, multipliers and report as a JSON document.
std::string to_json(const StationaryState& ss, const macro::MacroParams& p,
                    const VerificationReport& report);

}  // namespace gcd::stationary
