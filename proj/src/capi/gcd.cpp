#include "gcd/gcd.h"

#include <cstring>
#include <new>
#include <string>

#include "json.hpp"

#include "gcd/errors.hpp"
#include "gcd/io/config.hpp"
#include "gcd/io/output.hpp"
#include "gcd/stability/stability.hpp"
#include "gcd/stationary/stationary.hpp"

struct gcd_config {
  gcd::io::Config c;
};

struct gcd_trajectory {
  gcd::integrator::Trajectory t;
  std::string stop;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_key;

void set_error(std::string msg, std::string key = "") {
  g_error = std::move(msg);
  g_key = std::move(key);
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

template <class F>
int guard(F&& f) {
  set_error("");
  try {
    return f();
  } catch (const gcd::ConfigError& e) {
    set_error(e.what(), e.key());
    return GCD_ERR_CONFIG;
  } catch (const gcd::ModelError& e) {
    set_error(e.what());
    return GCD_ERR_CONFIG;
  } catch (const gcd::DomainError& e) {
    set_error(e.what(), e.variable());
    return GCD_ERR_POSITIVITY;
  } catch (const gcd::SolverError& e) {
    set_error(e.what());
    return GCD_ERR_SOLVER;
  } catch (const gcd::ConstraintDegeneracy& e) {
    set_error(e.what());
    return GCD_ERR_SOLVER;
  } catch (const std::exception& e) {
    set_error(e.what());
    return GCD_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return GCD_ERR_INTERNAL;
  }
}

int null_arg(const char* what) {
  set_error(std::string(what) + " must not be NULL");
  return GCD_ERR_CONFIG;
}

gcd::macro::MacroParams start_params(const gcd::io::Config& c) {
  return gcd::integrator::apply_schedule(c.params, c.schedule, c.run.t_start);
}

gcd::stationary::StationaryState fixed_point(const gcd::io::Config& c) {
  return gcd::stationary::solve_stationary(start_params(c), c.initial_state());
}

}  // namespace

extern "C" {

const char* gcd_version(void) { return "1.0.0"; }
const char* gcd_last_error(void) { return g_error.c_str(); }
const char* gcd_last_error_key(void) { return g_key.c_str(); }
void gcd_string_free(char* s) { std::free(s); }

int gcd_config_preset(const char* name, gcd_config** out) {
  if (!name || !out) return null_arg("name and out");
  return guard([&] {
    *out = new gcd_config{gcd::io::preset(name)};
    return GCD_OK;
  });
}

int gcd_config_parse(const char* json, const char* preset, gcd_config** out) {
  if (!json || !out) return null_arg("json and out");
  return guard([&] {
    *out = new gcd_config{gcd::io::parse_config(json, preset ? preset : "")};
    return GCD_OK;
  });
}

int gcd_config_load(const char* path, const char* preset, gcd_config** out) {
  if (!path || !out) return null_arg("path and out");
  return guard([&] {
    *out = new gcd_config{gcd::io::load_config(path, preset ? preset : "")};
    return GCD_OK;
  });
}

void gcd_config_free(gcd_config* c) { delete c; }

int gcd_config_set_param(gcd_config* c, const char* name, double value) {
  if (!c || !name) return null_arg("config and name");
  return guard([&] {
    auto p = c->c.params;
    gcd::macro::set_param(p, name, value);
    gcd::macro::validate(p);
    c->c.params = p;
    return GCD_OK;
  });
}

int gcd_config_get_param(const gcd_config* c, const char* name, double* value) {
  if (!c || !name || !value) return null_arg("config, name and value");
  return guard([&] {
    *value = gcd::macro::get_param(c->c.params, name);
    return GCD_OK;
  });
}

int gcd_config_set_seed(gcd_config* c, uint64_t seed) {
  if (!c) return null_arg("config");
  c->c.seed = seed;
  return GCD_OK;
}

int gcd_config_set_parallelism(gcd_config* c, int n) {
  if (!c) return null_arg("config");
  if (n < 1) {
    set_error("parallelism must be at least 1", "parallelism");
    return GCD_ERR_CONFIG;
  }
  c->c.parallelism = n;
  return GCD_OK;
}

int gcd_config_json(const gcd_config* c, char** out) {
  if (!c || !out) return null_arg("config and out");
  return guard([&] {
    *out = dup(gcd::io::to_json(c->c));
    return GCD_OK;
  });
}

int gcd_config_hash(const gcd_config* c, char** out) {
  if (!c || !out) return null_arg("config and out");
  return guard([&] {
    *out = dup(gcd::io::fnv1a_hex(gcd::io::to_json(c->c)));
    return GCD_OK;
  });
}

int gcd_config_seed(const gcd_config* c, uint64_t* seed) {
  if (!c || !seed) return null_arg("config and seed");
  *seed = c->c.seed;
  return GCD_OK;
}

int gcd_simulate(const gcd_config* c, gcd_trajectory** out) {
  if (!c || !out) return null_arg("config and out");
  return guard([&] {
    auto tr = std::make_unique<gcd_trajectory>();
    const auto x0 = c->c.initial_state();
    if (auto bad = gcd::macro::validate_state(x0, c->c.params); !bad.empty()) {
      throw gcd::ConfigError("initial", "infeasible initial state: " + bad.front());
    }
    tr->t = gcd::integrator::integrate(c->c.params, c->c.schedule, x0, c->c.run);
    tr->stop = gcd::integrator::to_string(tr->t.stop.kind);
    const auto kind = tr->t.stop.kind;
    *out = tr.release();
    if (kind == gcd::integrator::StopKind::positivity_abort) {
      set_error((*out)->t.stop.diagnostic, (*out)->t.stop.variable);
      return GCD_ERR_POSITIVITY;
    }
    if (kind == gcd::integrator::StopKind::solver_abort) {
      set_error((*out)->t.stop.diagnostic);
      return GCD_ERR_SOLVER;
    }
    return GCD_OK;
  });
}

void gcd_trajectory_free(gcd_trajectory* t) { delete t; }
size_t gcd_trajectory_samples(const gcd_trajectory* t) { return t ? t->t.samples.size() : 0; }
const char* gcd_trajectory_stop(const gcd_trajectory* t) { return t ? t->stop.c_str() : ""; }
double gcd_trajectory_stop_time(const gcd_trajectory* t) { return t ? t->t.stop.time : 0.0; }
const char* gcd_trajectory_stop_detail(const gcd_trajectory* t) {
  return t ? t->t.stop.diagnostic.c_str() : "";
}

int gcd_trajectory_csv(const gcd_trajectory* t, char** out) {
  if (!t || !out) return null_arg("trajectory and out");
  return guard([&] {
    *out = dup(gcd::io::trajectory_csv(t->t));
    return GCD_OK;
  });
}

int gcd_stationary(const gcd_config* c, char** json, int* all_pass) {
  if (!c || !json) return null_arg("config and json");
  return guard([&] {
    const auto p = start_params(c->c);
    const auto ss = fixed_point(c->c);
    const auto rep = gcd::stationary::verify_stationary(ss, p);
    *json = dup(gcd::stationary::to_json(ss, p, rep));
    if (all_pass) *all_pass = rep.all_pass() ? 1 : 0;
    return GCD_OK;
  });
}

int gcd_jacobian(const gcd_config* c, char** json) {
  if (!c || !json) return null_arg("config and json");
  return guard([&] {
    const auto ss = fixed_point(c->c);
    const auto j = gcd::stability::reduced_jacobian(start_params(c->c), ss.x);
    const auto e = gcd::stability::eigenanalysis(j.J);
    *json = dup(gcd::stability::to_json(j, e));
    return GCD_OK;
  });
}

int gcd_sweep(const gcd_config* c, char** csv) {
  if (!c || !csv) return null_arg("config and csv");
  return guard([&] {
    const auto& s = c->c.sweep;
    const auto mp = s.mu_p.empty() ? gcd::stability::log_space(s.n, s.lo, s.hi) : s.mu_p;
    const auto mq = s.mu_q.empty() ? gcd::stability::log_space(s.n, s.lo, s.hi) : s.mu_q;
    gcd::stability::ClassifyOptions opt;
    opt.horizon = c->c.run.t_end;
    opt.convergence_tol = c->c.run.convergence_tol;
    opt.include_mu_r = s.include_mu_r;
    const auto cells = gcd::stability::sweep(gcd::stability::grid(mp, mq), start_params(c->c),
                                             c->c.initial_state(), c->c.parallelism, opt);
    *csv = dup(gcd::stability::sweep_csv(cells));
    return GCD_OK;
  });
}

int gcd_sensitivity(const gcd_config* c, char** json) {
  if (!c || !json) return null_arg("config and json");
  return guard([&] {
    const auto ss = fixed_point(c->c);
    const auto s = gcd::stability::parameter_sensitivity(start_params(c->c), ss.x, c->c.sensitivity);
    *json = dup(gcd::stability::to_json(s));
    return GCD_OK;
  });
}

int gcd_global(const gcd_config* c, char** json) {
  if (!c || !json) return null_arg("config and json");
  return guard([&] {
    gcd::stability::GlobalOptions opt;
    opt.horizon = c->c.run.t_end;
    opt.convergence_tol = c->c.run.convergence_tol;
    opt.parallelism = c->c.parallelism;
    const auto r = gcd::stability::randomized_global_study(
        start_params(c->c), c->c.initial_state(), c->c.global.runs, c->c.seed, c->c.global.sigma, opt);
    *json = dup(gcd::stability::to_json(r));
    return GCD_OK;
  });
}

int gcd_write_atomic(const char* path, const char* content) {
  if (!path || !content) return null_arg("path and content");
  return guard([&] {
    gcd::io::write_atomic(path, content);
    return GCD_OK;
  });
}

int gcd_plot(const char* csv, const char* const* columns, size_t n_columns, const char* title,
             char** svg) {
  if (!csv || !svg || (n_columns && !columns)) return null_arg("csv, columns and svg");
  return guard([&] {
    std::vector<std::string> cols;
    for (size_t i = 0; i < n_columns; ++i) cols.emplace_back(columns[i] ? columns[i] : "");
    *svg = dup(gcd::io::plot_svg(gcd::io::parse_csv(csv), cols, title ? title : ""));
    return GCD_OK;
  });
}

}  // extern "C"
