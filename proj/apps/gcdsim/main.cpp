#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gcd/gcd.h"

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
};

struct Owned {
  char* p = nullptr;
  ~Owned() { gcd_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

int fail(int code) {
  std::string key = gcd_last_error_key();
  std::cerr << "gcdsim: " << gcd_last_error();
  if (!key.empty()) std::cerr << " [key: " << key << "]";
  std::cerr << '\n';
  return code;
}

gcd_config* load(const Common& o, int& code) {
  gcd_config* c = nullptr;
  if (o.config.empty()) {
    code = gcd_config_preset(o.preset.empty() ? "baseline" : o.preset.c_str(), &c);
  } else {
    code = gcd_config_load(o.config.c_str(), o.preset.empty() ? nullptr : o.preset.c_str(), &c);
  }
  if (code != GCD_OK) return nullptr;
  if (o.seed) gcd_config_set_seed(c, *o.seed);
  if (o.parallelism && (code = gcd_config_set_parallelism(c, *o.parallelism)) != GCD_OK) {
    gcd_config_free(c);
    return nullptr;
  }
  return c;
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

int write(const std::string& path, const std::string& content) {
  const int rc = gcd_write_atomic(path.c_str(), content.c_str());
  return rc == GCD_OK ? rc : fail(rc);
}

int write_manifest(const std::string& dir, const std::string& command, gcd_config* c,
                   double seconds, const std::string& stop, const std::vector<std::string>& outputs) {
  nlohmann::ordered_json m;
  m["command"] = command;
  if (c) {
    Owned cfg, hash;
    gcd_config_json(c, &cfg.p);
    gcd_config_hash(c, &hash.p);
    std::uint64_t seed = 0;
    gcd_config_seed(c, &seed);
    m["config_hash"] = hash.str();
    m["config"] = nlohmann::ordered_json::parse(cfg.str());
    m["seed"] = seed;
  }
  m["version"] = gcd_version();
  m["wall_seconds"] = seconds;
  m["stop_reason"] = stop;
  m["outputs"] = outputs;
  return write(join(dir, command + ".manifest.json"), m.dump(2) + "\n");
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

using Producer = int (*)(const gcd_config*, char**);

// Runs one report-producing command and writes its output and manifest.
int report(const Common& o, const std::string& command, Producer produce, const std::string& file) {
  const auto t0 = std::chrono::steady_clock::now();
  int code = GCD_OK;
  gcd_config* c = load(o, code);
  if (!c) return fail(code);
  Owned out;
  code = produce(c, &out.p);
  if (code != GCD_OK) {
    const int rc = fail(code);
    write_manifest(o.out, command, c, since(t0), "error", {});
    gcd_config_free(c);
    return rc;
  }
  const std::string path = join(o.out, file);
  if ((code = write(path, out.str())) == GCD_OK) {
    code = write_manifest(o.out, command, c, since(t0), "completed", {path});
  }
  gcd_config_free(c);
  if (code == GCD_OK) std::cout << path << '\n';
  return code;
}

int cmd_simulate(const Common& o) {
  const auto t0 = std::chrono::steady_clock::now();
  int code = GCD_OK;
  gcd_config* c = load(o, code);
  if (!c) return fail(code);
  gcd_trajectory* tr = nullptr;
  code = gcd_simulate(c, &tr);
  if (!tr) {
    const int rc = fail(code);
    gcd_config_free(c);
    return rc;
  }
  const std::string stop = gcd_trajectory_stop(tr);
  std::cerr << "stop: " << stop << " at t = " << gcd_trajectory_stop_time(tr);
  if (*gcd_trajectory_stop_detail(tr)) std::cerr << " (" << gcd_trajectory_stop_detail(tr) << ")";
  std::cerr << '\n';
  Owned csv;
  int rc = gcd_trajectory_csv(tr, &csv.p);
  const std::string path = join(o.out, "trajectory.csv");
  if (rc == GCD_OK) rc = write(path, csv.str());
  if (rc == GCD_OK) rc = write_manifest(o.out, "simulate", c, since(t0), stop, {path});
  gcd_trajectory_free(tr);
  gcd_config_free(c);
  if (rc != GCD_OK) return rc;
  std::cout << path << '\n';
  return code;
}

int cmd_stationary(const Common& o) {
  const auto t0 = std::chrono::steady_clock::now();
  int code = GCD_OK;
  gcd_config* c = load(o, code);
  if (!c) return fail(code);
  Owned json;
  int pass = 0;
  code = gcd_stationary(c, &json.p, &pass);
  if (code != GCD_OK) {
    const int rc = fail(code);
    write_manifest(o.out, "stationary", c, since(t0), "error", {});
    gcd_config_free(c);
    return rc;
  }
  const std::string path = join(o.out, "stationary.json");
  int rc = write(path, json.str() + "\n");
  if (rc == GCD_OK) {
    rc = write_manifest(o.out, "stationary", c, since(t0), pass ? "verified" : "verification_failed",
                        {path});
  }
  gcd_config_free(c);
  if (rc != GCD_OK) return rc;
  std::cout << path << '\n';
  if (!pass) {
    std::cerr << "gcdsim: fixed point found but some identities fail; see " << path << '\n';
    return GCD_ERR_SOLVER;
  }
  return GCD_OK;
}

int cmd_plot(const std::string& csv_path, const std::vector<std::string>& vars,
             const std::string& svg_path, const std::string& title) {
  std::ifstream in(csv_path);
  if (!in) {
    std::cerr << "gcdsim: cannot read '" << csv_path << "'\n";
    return GCD_ERR_CONFIG;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<const char*> cols;
  for (const auto& v : vars) cols.push_back(v.c_str());
  Owned svg;
  const int code = gcd_plot(ss.str().c_str(), cols.data(), cols.size(), title.c_str(), &svg.p);
  if (code != GCD_OK) return fail(code);
  if (const int rc = write(svg_path, svg.str()); rc != GCD_OK) return rc;
  std::cout << svg_path << '\n';
  return GCD_OK;
}

void add_common(CLI::App* sub, Common& o) {
  sub->add_option("--config", o.config, "JSON config file");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--preset", o.preset, "baseline, austerity or conspicuous");
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_option("--parallelism", o.parallelism, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"General constrained dynamics macro simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gcd_version()));

  Common o;
  auto* simulate = app.add_subcommand("simulate", "Integrate a run and write its trajectory");
  auto* stationary = app.add_subcommand("stationary", "Solve and verify the fixed point");
  auto* jacobian = app.add_subcommand("jacobian", "Jacobian and eigenvalues at the fixed point");
  auto* sweep = app.add_subcommand("sweep", "Stability classification over power-factor scales");
  auto* sensitivity = app.add_subcommand("sensitivity", "Rate sensitivities to parameters");
  auto* global = app.add_subcommand("global", "Randomized initial-condition study");
  for (auto* s : {simulate, stationary, jacobian, sweep, sensitivity, global}) add_common(s, o);

  std::string csv, svg = "plot.svg", title;
  std::vector<std::string> vars;
  auto* plot = app.add_subcommand("plot", "SVG line chart from a trajectory CSV");
  plot->add_option("--csv", csv, "Trajectory CSV")->required();
  plot->add_option("--vars", vars, "Columns to plot")->delimiter(',');
  plot->add_option("--svg", svg, "Output SVG path");
  plot->add_option("--title", title, "Chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : GCD_ERR_CONFIG;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o);
    if (stationary->parsed()) return cmd_stationary(o);
    if (jacobian->parsed()) return report(o, "jacobian", gcd_jacobian, "jacobian.json");
    if (sweep->parsed()) return report(o, "sweep", gcd_sweep, "sweep.csv");
    if (sensitivity->parsed()) return report(o, "sensitivity", gcd_sensitivity, "sensitivity.json");
    if (global->parsed()) return report(o, "global", gcd_global, "global.json");
    if (plot->parsed()) return cmd_plot(csv, vars, svg, title);
  } catch (const std::exception& e) {
    std::cerr << "gcdsim: " << e.what() << '\n';
    return GCD_ERR_INTERNAL;
  }
  return GCD_ERR_INTERNAL;
}
