#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcd/integrator/integrator.hpp"
#include "gcd/stationary/stationary.hpp"

namespace gcd::stability {

struct ReducedJacobian {
  Eigen::MatrixXd J;  // d x_dot_i / d x_j over the 25 free variables
  std::vector<double> steps;
  /// Columns where the perturbation left the feasible region.
  std::vector<int> one_sided;
  /// Largest relative change of an entry (|J_ij| > 1e-8) when the step is halved.
  double richardson_max_rel = 0;
  std::vector<std::string> warnings;
};

ReducedJacobian reduced_jacobian(const macro::MacroParams& p, const macro::MacroState& x_eq);

struct EigenReport {
  std::vector<std::complex<double>> eigenvalues;  // ascending magnitude
  double spectral_radius = 0;
  double threshold = 0;
  int near_zero = 0;
  /// Largest real part among eigenvalues above the threshold.
  double max_real = 0;
  /// |third smallest| / threshold.
  double gap_ratio = 0;
  /// Right singular vectors with singular value below threshold.
  Eigen::MatrixXd null_space;
  /// Angle between each swap direction and the null space, radians.
  double angle_labor_swap = 0;
  double angle_financing_swap = 0;
  /// Largest principal angle between span{labor, financing} and the null space.
  double span_angle = 0;
};

/// Throws SolverError if the eigen-solver fails.
EigenReport eigenanalysis(const Eigen::MatrixXd& J, double rel_threshold = 1e-6);

enum class CellClass { unstable_red, stable_abort_orange, converged_green, nonconverged_blue };
std::string to_string(CellClass c);

struct ClassifyOptions {
  double horizon = 100.0;
  double convergence_tol = 0.01;
  bool include_mu_r = true;
};

struct CellClassification {
  double mu_p = 1, mu_q = 1;
  CellClass cls = CellClass::nonconverged_blue;
  bool has_eigen = false;
  double max_real = 0;
  double time_to_converge = -1;  // green only
  double distance = -1;          // blue only
  integrator::StopReason stop;
  /// Set when no fixed point was obtained and only the trajectory decided.
  bool trajectory_only = false;
  std::string note;
};

/// Scales the power factors, solves for the fixed point seeded by `x0` and
/// integrates from `x0`.
CellClassification classify_point(double mu_p_scale, double mu_q_scale,
                                  const macro::MacroParams& params, const macro::MacroState& x0,
                                  const ClassifyOptions& opt = {});

struct GridPoint {
  double mu_p, mu_q;
};

/// n log-spaced values in [lo, hi].
std::vector<double> log_space(int n, double lo, double hi);
std::vector<GridPoint> grid(const std::vector<double>& mu_p, const std::vector<double>& mu_q);

/// Cells evaluated on `parallelism` threads; output order follows `cells`.
std::vector<CellClassification> sweep(const std::vector<GridPoint>& cells,
                                      const macro::MacroParams& params,
                                      const macro::MacroState& x0, int parallelism,
                                      const ClassifyOptions& opt = {});

std::string sweep_csv(const std::vector<CellClassification>& cells);

struct Sensitivity {
  std::vector<std::string> names;
  Eigen::MatrixXd d;  // 25 x names.size()
};

/// Throws ConfigError on an unknown parameter name.
Sensitivity parameter_sensitivity(const macro::MacroParams& p, const macro::MacroState& x_eq,
                                  const std::vector<std::string>& names);

/// Where a run from x0 ends up: the trajectory and, if it completed, the fixed
/// point sharing its final family coordinates.
struct Outcome {
  integrator::StopReason stop;
  macro::MacroState final_state;
  std::optional<stationary::StationaryState> fixed_point;
  std::optional<double> converge_time;
  double distance = -1;
  std::string note;
};

Outcome run_to_rest(const macro::MacroParams& p, const macro::MacroState& x0, double horizon,
                    double tol = 0.01);

struct GlobalRun {
  std::uint64_t seed = 0;
  int redraws = 0;
  macro::MacroState initial;
  Outcome outcome;
  bool converged() const { return outcome.converge_time.has_value(); }
};

struct Spread {
  std::string name;
  double rel = 0;  // (max - min) / |mean| over converged runs
};

struct GlobalStudyReport {
  macro::MacroParams params;
  double sigma = 0;
  std::uint64_t seed = 0;
  std::vector<GlobalRun> runs;
  int converged = 0;
  std::vector<Spread> production;
  std::vector<Spread> splits;
};

struct GlobalOptions {
  double horizon = 100.0;
  double convergence_tol = 0.01;
  int max_redraws = 100;
  int parallelism = 1;
};

GlobalStudyReport randomized_global_study(const macro::MacroParams& p,
                                          const macro::MacroState& base, int n_runs,
                                          std::uint64_t seed, double sigma,
                                          const GlobalOptions& opt = {});

std::string to_json(const ReducedJacobian& j, const EigenReport& e);
std::string to_json(const Sensitivity& s);
std::string to_json(const GlobalStudyReport& r);

}  // namespace gcd::stability
