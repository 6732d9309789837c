#include "gcd/integrator/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "gcd/errors.hpp"

namespace gcd::integrator {

void Schedule::validate() const {
  for (const auto& [name, path] : paths) {
    if (!macro::param_member(name)) {
      throw ConfigError(name, "schedule names unknown parameter '" + name + "'");
    }
    if (path.empty()) throw ConfigError(name, "schedule for '" + name + "' has no breakpoints");
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (!std::isfinite(path[i].t) || !std::isfinite(path[i].value)) {
        throw ConfigError(name, "schedule for '" + name + "' has a non-finite breakpoint");
      }
      if (i > 0 && path[i].t < path[i - 1].t) {
        throw ConfigError(name, "schedule times for '" + name + "' must not decrease");
      }
      if (i > 1 && path[i].t == path[i - 2].t) {
        throw ConfigError(name, "schedule for '" + name + "' repeats a time more than twice");
      }
    }
  }
}

std::vector<double> Schedule::times() const {
  std::vector<double> out;
  for (const auto& [name, path] : paths) {
    for (const auto& b : path) out.push_back(b.t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> Schedule::jump_times() const {
  std::vector<double> out;
  for (const auto& [name, path] : paths) {
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (path[i].t == path[i - 1].t) out.push_back(path[i].t);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double evaluate_path(const std::vector<Breakpoint>& path, double t, bool left) {
  if (t < path.front().t) return path.front().value;
  if (left) {
    // first breakpoint at t holds the value arriving from the left
    auto it = std::lower_bound(path.begin(), path.end(), t,
                               [](const Breakpoint& b, double x) { return b.t < x; });
    if (it != path.end() && it->t == t) return it->value;
  }
  auto it = std::upper_bound(path.begin(), path.end(), t,
                             [](double x, const Breakpoint& b) { return x < b.t; });
  const auto i = static_cast<std::size_t>(it - path.begin()) - 1;
  if (i + 1 == path.size()) return path.back().value;
  const auto& a = path[i];
  const auto& b = path[i + 1];
  const double w = (t - a.t) / (b.t - a.t);
  return a.value + w * (b.value - a.value);
}

macro::MacroParams apply_schedule(const macro::MacroParams& params, const Schedule& schedule,
                                  double t, bool left) {
  auto p = params;
  for (const auto& [name, path] : schedule.paths) {
    macro::set_param(p, name, evaluate_path(path, t, left));
  }
  return p;
}

}  // namespace gcd::integrator
