#pragma once

#include <map>
#include <string>
#include <vector>

#include "gcd/macro/params.hpp"

namespace gcd::integrator {

struct Breakpoint {
  double t = 0;
  double value = 0;
};

/// Piecewise-linear parameter paths with constant extrapolation. Two
/// consecutive breakpoints at the same time encode a jump; the path is
/// right-continuous there.
struct Schedule {
  std::map<std::string, std::vector<Breakpoint>> paths;

  bool empty() const { return paths.empty(); }
  /// Throws ConfigError on unknown parameter names or decreasing times.
  void validate() const;
  /// Sorted, de-duplicated breakpoint times across all paths.
  std::vector<double> times() const;
  /// Times at which some path jumps.
  std::vector<double> jump_times() const;
};

/// `left` selects the left limit at a jump.
double evaluate_path(const std::vector<Breakpoint>& path, double t, bool left = false);

macro::MacroParams apply_schedule(const macro::MacroParams& params, const Schedule& schedule,
                                  double t, bool left = false);

}  // namespace gcd::integrator
