#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gcd/integrator/schedule.hpp"
#include "gcd/macro/model.hpp"

namespace gcd::integrator {

struct RunConfig {
  double t_start = 0.0;
  double t_end = 100.0;
  double rtol = 1e-8;
  double atol = 1e-10;
  double sample_interval = 0.1;
  double positivity_floor = 1e-9;
  double convergence_tol = 0.01;
  std::size_t max_steps = 5'000'000;
  /// Permits the switch to the implicit multistep method on stiffness.
  bool allow_implicit = true;
  /// When set, convergence towards this state is reported as the stop reason.
  std::optional<macro::MacroState> reference;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

enum class StopKind { completed, converged, positivity_abort, solver_abort };

struct StopReason {
  StopKind kind = StopKind::completed;
  double time = 0.0;
  std::string variable;
  std::string diagnostic;
};

std::string to_string(StopKind k);

struct Sample {
  double t = 0.0;
  macro::MacroState x;
  macro::DependentQuantities d;
  macro::Evaluation ev;
  macro::UtilityRecord u;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t implicit_steps = 0;
  std::size_t stiffness_switches = 0;
};

struct Trajectory {
  std::vector<Sample> samples;
  StopReason stop;
  IntegratorStats stats;

  bool aborted() const {
    return stop.kind == StopKind::positivity_abort || stop.kind == StopKind::solver_abort;
  }
  const Sample& back() const { return samples.back(); }
};

Trajectory integrate(const macro::MacroParams& params, const Schedule& schedule,
                     const macro::MacroState& x0, const RunConfig& config);

/// Largest relative deviation from `reference` after removing the components
/// along the labor-swap and financing-swap directions.
double neutral_projected_deviation(const macro::MacroState& x, const macro::MacroState& reference);

/// Earliest sample time from which the projected deviation stays below tol
/// until the end of the trajectory.
std::optional<double> detect_convergence(const Trajectory& traj, const macro::MacroState& reference,
                                         double tol);

}  // namespace gcd::integrator
