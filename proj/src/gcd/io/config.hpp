#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcd/integrator/integrator.hpp"
#include "gcd/macro/params.hpp"

namespace gcd::io {

struct SweepSettings {
  int n = 21;
  double lo = 0.01, hi = 100.0;
  /// Explicit axes; when empty the log grid above is used.
  std::vector<double> mu_p, mu_q;
  bool include_mu_r = true;
};

struct GlobalSettings {
  int runs = 20;
  double sigma = 0.1;
};

/// A fully expanded run description: preset, overrides and schedule merged.
struct Config {
  std::string preset = "baseline";
  macro::MacroParams params;
  macro::InitialConditions initial;
  integrator::Schedule schedule;
  integrator::RunConfig run;
  SweepSettings sweep;
  GlobalSettings global;
  std::vector<std::string> sensitivity = {"alpha_C1", "alpha_C2", "beta_G2", "gamma_D",
                                          "theta", "kappa_1", "mu_fK1"};
  std::uint64_t seed = 1;
  int parallelism = 1;

  macro::MacroState initial_state() const { return macro::to_state(initial); }
};

std::vector<std::string> preset_names();

/// Expands a preset into params and schedule. Throws ConfigError on an
/// unknown name.
Config preset(const std::string& name);

/// Parses a JSON document. Unknown keys and invalid values throw
/// ConfigError naming the key.
Config parse_config(const std::string& text, const std::string& preset_override = "");
Config load_config(const std::string& path, const std::string& preset_override = "");

/// Canonical JSON of the expanded config; parse_config of it reproduces the
/// same Config.
std::string to_json(const Config& c);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace gcd::io
