#include "gcd/io/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gcd/errors.hpp"

namespace gcd::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string> keys) {
  const std::set<std::string> allowed(keys);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.contains(it.key())) {
      const std::string key = where.empty() ? it.key() : where + "." + it.key();
      throw ConfigError(key, "unknown config key '" + key + "'");
    }
  }
}

const json& object_at(const json& j, const std::string& key) {
  if (!j.is_object()) throw ConfigError(key, "'" + key + "' must be an object");
  return j;
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "'" + key + "' must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key, "'" + key + "' must be an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, "'" + key + "' must be an array of numbers");
  std::vector<double> v;
  for (const auto& e : j) v.push_back(number(e, key));
  return v;
}

// gamma_D steps up at 30 and 60, ramps back between 40 and 50; price speeds
// drop by 100x at 60.
integrator::Schedule austerity_schedule(const macro::MacroParams& p) {
  integrator::Schedule s;
  const double g0 = p.gamma_D, g1 = 0.6;
  s.paths["gamma_D"] = {{30, g0}, {30, g1}, {40, g1}, {50, g0}, {60, g0}, {60, g1}};
  for (auto name : macro::price_power_names(true)) {
    const double v = macro::get_param(p, name);
    s.paths[std::string(name)] = {{60, v}, {60, v / 100.0}};
  }
  return s;
}

}  // namespace

std::vector<std::string> preset_names() { return {"baseline", "austerity", "conspicuous"}; }

Config preset(const std::string& name) {
  Config c;
  c.preset = name;
  if (name == "baseline") return c;
  if (name == "austerity") {
    c.schedule = austerity_schedule(c.params);
    return c;
  }
  if (name == "conspicuous") {
    c.params.conspicuous = true;
    c.params.mu_abC = 1.0;
    c.params.mu_baC = 1.0;
    return c;
  }
  throw ConfigError("preset", "unknown preset '" + name + "' (baseline, austerity, conspicuous)");
}

Config parse_config(const std::string& text, const std::string& preset_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  reject_unknown(j, "", {"preset", "params", "initial", "schedule", "run", "sweep", "global",
                         "sensitivity", "seed", "parallelism"});

  std::string name = "baseline";
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("preset", "'preset' must be a string");
    name = j["preset"].get<std::string>();
  }
  if (!preset_override.empty()) name = preset_override;
  Config c = preset(name);

  bool explicit_offsets = false;
  if (j.contains("params")) {
    for (const auto& [k, v] : object_at(j["params"], "params").items()) {
      const std::string key = "params." + k;
      if (k == "conspicuous") {
        if (!v.is_boolean()) throw ConfigError(key, "'" + key + "' must be true or false");
        c.params.conspicuous = v.get<bool>();
        continue;
      }
      if (!macro::param_member(k)) throw ConfigError(key, "unknown config key '" + key + "'");
      macro::set_param(c.params, k, number(v, key));
      if (k.ends_with("_offset")) explicit_offsets = true;
    }
  }
  if (j.contains("initial")) {
    for (const auto& [k, v] : object_at(j["initial"], "initial").items()) {
      const std::string key = "initial." + k;
      bool found = false;
      for (const auto& f : macro::initial_fields()) {
        if (f.name == k) {
          c.initial.*f.member = number(v, key);
          found = true;
        }
      }
      if (!found) throw ConfigError(key, "unknown config key '" + key + "'");
    }
    if (!explicit_offsets) macro::apply_rate_offsets(c.initial, c.params);
  }
  // preset paths follow the final parameter values
  if (name == "austerity") c.schedule = austerity_schedule(c.params);
  if (j.contains("schedule")) {
    for (const auto& [k, v] : object_at(j["schedule"], "schedule").items()) {
      const std::string key = "schedule." + k;
      if (!v.is_array()) throw ConfigError(key, "'" + key + "' must be an array of [t, value] pairs");
      std::vector<integrator::Breakpoint> path;
      for (const auto& bp : v) {
        const auto tv = numbers(bp, key);
        if (tv.size() != 2) throw ConfigError(key, "'" + key + "' entries must be [t, value]");
        path.push_back({tv[0], tv[1]});
      }
      c.schedule.paths[k] = path;
    }
  }
  if (j.contains("run")) {
    const auto& r = object_at(j["run"], "run");
    reject_unknown(r, "run", {"t_start", "t_end", "rtol", "atol", "sample_interval",
                              "positivity_floor", "convergence_tol", "allow_implicit"});
    auto set = [&](const char* k, double& dst) {
      if (r.contains(k)) dst = number(r[k], std::string("run.") + k);
    };
    set("t_start", c.run.t_start);
    set("t_end", c.run.t_end);
    set("rtol", c.run.rtol);
    set("atol", c.run.atol);
    set("sample_interval", c.run.sample_interval);
    set("positivity_floor", c.run.positivity_floor);
    set("convergence_tol", c.run.convergence_tol);
    if (r.contains("allow_implicit")) {
      if (!r["allow_implicit"].is_boolean()) {
        throw ConfigError("run.allow_implicit", "'run.allow_implicit' must be true or false");
      }
      c.run.allow_implicit = r["allow_implicit"].get<bool>();
    }
  }
  if (j.contains("sweep")) {
    const auto& s = object_at(j["sweep"], "sweep");
    reject_unknown(s, "sweep", {"n", "lo", "hi", "mu_p", "mu_q", "include_mu_r"});
    if (s.contains("n")) c.sweep.n = integer(s["n"], "sweep.n");
    if (s.contains("lo")) c.sweep.lo = number(s["lo"], "sweep.lo");
    if (s.contains("hi")) c.sweep.hi = number(s["hi"], "sweep.hi");
    if (s.contains("mu_p")) c.sweep.mu_p = numbers(s["mu_p"], "sweep.mu_p");
    if (s.contains("mu_q")) c.sweep.mu_q = numbers(s["mu_q"], "sweep.mu_q");
    if (s.contains("include_mu_r")) {
      if (!s["include_mu_r"].is_boolean()) {
        throw ConfigError("sweep.include_mu_r", "'sweep.include_mu_r' must be true or false");
      }
      c.sweep.include_mu_r = s["include_mu_r"].get<bool>();
    }
    if (c.sweep.n < 1) throw ConfigError("sweep.n", "'sweep.n' must be at least 1");
    if (!(c.sweep.lo > 0.0 && c.sweep.hi >= c.sweep.lo)) {
      throw ConfigError("sweep.lo", "sweep range needs 0 < lo <= hi");
    }
    for (double v : c.sweep.mu_p) {
      if (!(v >= 0.0)) throw ConfigError("sweep.mu_p", "scales must be non-negative");
    }
    for (double v : c.sweep.mu_q) {
      if (!(v >= 0.0)) throw ConfigError("sweep.mu_q", "scales must be non-negative");
    }
  }
  if (j.contains("global")) {
    const auto& g = object_at(j["global"], "global");
    reject_unknown(g, "global", {"runs", "sigma"});
    if (g.contains("runs")) c.global.runs = integer(g["runs"], "global.runs");
    if (g.contains("sigma")) c.global.sigma = number(g["sigma"], "global.sigma");
    if (c.global.runs < 1) throw ConfigError("global.runs", "'global.runs' must be at least 1");
    if (!(c.global.sigma >= 0.0)) throw ConfigError("global.sigma", "'global.sigma' must be >= 0");
  }
  if (j.contains("sensitivity")) {
    const auto& s = j["sensitivity"];
    if (!s.is_array()) throw ConfigError("sensitivity", "'sensitivity' must be an array of names");
    c.sensitivity.clear();
    for (const auto& e : s) {
      if (!e.is_string() || !macro::param_member(e.get<std::string>())) {
        throw ConfigError("sensitivity", "'sensitivity' lists an unknown parameter: " + e.dump());
      }
      c.sensitivity.push_back(e.get<std::string>());
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "'seed' must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("parallelism")) {
    c.parallelism = integer(j["parallelism"], "parallelism");
    if (c.parallelism < 1) throw ConfigError("parallelism", "'parallelism' must be at least 1");
  }

  macro::validate(c.params);
  c.schedule.validate();
  c.run.validate();
  return c;
}

Config load_config(const std::string& path, const std::string& preset_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), preset_override);
}

std::string to_json(const Config& c) {
  ordered_json j;
  j["preset"] = c.preset;
  for (const auto& f : macro::param_fields()) j["params"][std::string(f.name)] = c.params.*f.member;
  j["params"]["conspicuous"] = c.params.conspicuous;
  for (const auto& f : macro::initial_fields()) j["initial"][std::string(f.name)] = c.initial.*f.member;
  j["schedule"] = ordered_json::object();
  for (const auto& [k, path] : c.schedule.paths) {
    auto& arr = j["schedule"][k] = ordered_json::array();
    for (const auto& bp : path) arr.push_back({bp.t, bp.value});
  }
  j["run"] = {{"t_start", c.run.t_start},
              {"t_end", c.run.t_end},
              {"rtol", c.run.rtol},
              {"atol", c.run.atol},
              {"sample_interval", c.run.sample_interval},
              {"positivity_floor", c.run.positivity_floor},
              {"convergence_tol", c.run.convergence_tol},
              {"allow_implicit", c.run.allow_implicit}};
  j["sweep"] = {{"n", c.sweep.n},
                {"lo", c.sweep.lo},
                {"hi", c.sweep.hi},
                {"mu_p", c.sweep.mu_p},
                {"mu_q", c.sweep.mu_q},
                {"include_mu_r", c.sweep.include_mu_r}};
  j["global"] = {{"runs", c.global.runs}, {"sigma", c.global.sigma}};
  j["sensitivity"] = c.sensitivity;
  j["seed"] = c.seed;
  j["parallelism"] = c.parallelism;
  return j.dump(2);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gcd::io
