#include "gcd/stability/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "gcd/errors.hpp"
#include "gcd/numeric.hpp"

namespace gcd::stability {

using macro::idx;
using macro::kNumFree;
using macro::MacroParams;
using macro::MacroState;
using macro::Var;

namespace {

Eigen::VectorXd rates_at(const macro::Model& model, const Eigen::VectorXd& x) {
  MacroState s;
  for (std::size_t i = 0; i < kNumFree; ++i) s.values[i] = x[static_cast<Eigen::Index>(i)];
  macro::check_domain(s);
  const auto r = macro::evaluate(model, s).free_rates();
  return Eigen::Map<const Eigen::VectorXd>(r.data(), kNumFree);
}

Eigen::VectorXd as_vec(const std::array<double, kNumFree>& a) {
  return Eigen::Map<const Eigen::VectorXd>(a.data(), kNumFree);
}

double angle_to_subspace(const Eigen::VectorXd& v, const Eigen::MatrixXd& basis) {
  if (basis.cols() == 0) return M_PI / 2;
  const Eigen::VectorXd proj = basis * (basis.transpose() * v);
  const double c = std::clamp(proj.norm() / v.norm(), 0.0, 1.0);
  return std::acos(c);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

ReducedJacobian reduced_jacobian(const MacroParams& p, const MacroState& x_eq) {
  const auto model = macro::build_model(p);
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x_eq.values.data(), kNumFree);
  auto f = [&](const Eigen::VectorXd& v) { return rates_at(model, v); };

  ReducedJacobian out;
  numeric::OneSidedColumns one_sided;
  out.J = numeric::central_jacobian(f, x, 1e-6, &one_sided);
  for (Eigen::Index k = 0; k < x.size(); ++k) out.steps.push_back(numeric::fd_step(x[k]));
  for (auto k : one_sided) {
    out.one_sided.push_back(static_cast<int>(k));
    out.warnings.push_back("one-sided difference in column " +
                           std::string(macro::kRateNames[static_cast<std::size_t>(k)]));
  }

  const Eigen::MatrixXd half = numeric::central_jacobian(f, x, 0.5e-6);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < out.J.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.J.cols(); ++j) {
      const double a = out.J(i, j);
      if (std::abs(a) <= 1e-8) continue;
      worst = std::max(worst, std::abs(half(i, j) - a) / std::abs(a));
    }
  }
  out.richardson_max_rel = worst;
  if (worst > 1e-4) {
    out.warnings.push_back("step-halving check differs by " + fmt(worst) + " relative");
  }
  return out;
}

EigenReport eigenanalysis(const Eigen::MatrixXd& J, double rel_threshold) {
  if (!J.allFinite()) throw SolverError("eigenanalysis: Jacobian has non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> es(J, false);
  if (es.info() != Eigen::Success) throw SolverError("eigenanalysis: eigen-solver did not converge");

  EigenReport r;
  const Eigen::VectorXcd ev = es.eigenvalues();
  r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::stable_sort(r.eigenvalues.begin(), r.eigenvalues.end(),
                   [](auto a, auto b) { return std::abs(a) < std::abs(b); });
  for (auto z : r.eigenvalues) r.spectral_radius = std::max(r.spectral_radius, std::abs(z));
  r.threshold = rel_threshold * r.spectral_radius;
  r.max_real = -std::numeric_limits<double>::infinity();
  for (auto z : r.eigenvalues) {
    if (std::abs(z) <= r.threshold) {
      ++r.near_zero;
    } else {
      r.max_real = std::max(r.max_real, z.real());
    }
  }
  if (r.near_zero == static_cast<int>(r.eigenvalues.size())) r.max_real = 0.0;
  if (r.eigenvalues.size() > 2 && r.threshold > 0) {
    r.gap_ratio = std::abs(r.eigenvalues[2]) / r.threshold;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  int null_dim = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] <= rel_threshold * smax) ++null_dim;
  }
  r.null_space = svd.matrixV().rightCols(null_dim);

  if (J.rows() == static_cast<Eigen::Index>(kNumFree)) {
    const Eigen::VectorXd v1 = as_vec(macro::labor_swap_direction());
    const Eigen::VectorXd v2 = as_vec(macro::financing_swap_direction());
    r.angle_labor_swap = angle_to_subspace(v1, r.null_space);
    r.angle_financing_swap = angle_to_subspace(v2, r.null_space);
    // principal angles between span{v1, v2} and the null space
    Eigen::MatrixXd swaps(kNumFree, 2);
    swaps << v1, v2;
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(swaps).householderQ() *
                              Eigen::MatrixXd::Identity(kNumFree, 2);
    if (null_dim == 0) {
      r.span_angle = M_PI / 2;
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> c(q.transpose() * r.null_space);
      const auto& cs = c.singularValues();
      double smallest = 1.0;
      for (Eigen::Index k = 0; k < 2; ++k) smallest = std::min(smallest, k < cs.size() ? cs[k] : 0.0);
      r.span_angle = std::acos(std::clamp(smallest, 0.0, 1.0));
      // the spaces must also have equal dimension to coincide
      if (null_dim != 2) r.span_angle = std::max(r.span_angle, M_PI / 2);
    }
  }
  return r;
}

std::string to_string(CellClass c) {
  switch (c) {
    case CellClass::unstable_red: return "unstable_red";
    case CellClass::stable_abort_orange: return "stable_abort_orange";
    case CellClass::converged_green: return "converged_green";
    case CellClass::nonconverged_blue: return "nonconverged_blue";
  }
  return "unknown";
}

Outcome run_to_rest(const MacroParams& p, const MacroState& x0, double horizon, double tol) {
  integrator::RunConfig cfg;
  cfg.t_end = horizon;
  cfg.convergence_tol = tol;
  const auto tr = integrator::integrate(p, {}, x0, cfg);
  Outcome o;
  o.stop = tr.stop;
  o.final_state = tr.back().x;
  if (tr.aborted()) return o;
  try {
    o.fixed_point = stationary::solve_stationary(p, o.final_state);
  } catch (const std::exception& e) {
    o.note = std::string("no fixed point near the final state: ") + e.what();
    return o;
  }
  o.converge_time = integrator::detect_convergence(tr, o.fixed_point->x, tol);
  o.distance = integrator::neutral_projected_deviation(o.final_state, o.fixed_point->x);
  return o;
}

CellClassification classify_point(double mu_p_scale, double mu_q_scale, const MacroParams& params,
                                  const MacroState& x0, const ClassifyOptions& opt) {
  if (!(mu_p_scale >= 0.0) || !(mu_q_scale >= 0.0)) {
    throw ConfigError("scale", "power-factor scales must be non-negative");
  }
  CellClassification c;
  c.mu_p = mu_p_scale;
  c.mu_q = mu_q_scale;
  const MacroParams p = macro::scale_powers(params, mu_p_scale, mu_q_scale, opt.include_mu_r);

  try {
    const auto ss = stationary::solve_stationary(p, x0);
    const auto e = eigenanalysis(reduced_jacobian(p, ss.x).J);
    c.has_eigen = true;
    c.max_real = e.max_real;
  } catch (const std::exception& e) {
    c.trajectory_only = true;
    c.note = std::string("fixed point unavailable: ") + e.what();
  }
  if (c.has_eigen && c.max_real > 0.0) {
    c.cls = CellClass::unstable_red;
    return c;
  }

  const Outcome o = run_to_rest(p, x0, opt.horizon, opt.convergence_tol);
  c.stop = o.stop;
  if (o.stop.kind == integrator::StopKind::positivity_abort ||
      o.stop.kind == integrator::StopKind::solver_abort) {
    c.cls = CellClass::stable_abort_orange;
    return c;
  }
  if (o.converge_time) {
    c.cls = CellClass::converged_green;
    c.time_to_converge = *o.converge_time;
  } else {
    c.cls = CellClass::nonconverged_blue;
    c.distance = o.distance;
    if (!o.note.empty()) c.note += (c.note.empty() ? "" : "; ") + o.note;
  }
  return c;
}

std::vector<double> log_space(int n, double lo, double hi) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("grid", "log grid needs n >= 1 and 0 < lo <= hi");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    v[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
  }
  return v;
}

std::vector<GridPoint> grid(const std::vector<double>& mu_p, const std::vector<double>& mu_q) {
  std::vector<GridPoint> g;
  for (double q : mu_q) {
    for (double pp : mu_p) g.push_back({pp, q});
  }
  return g;
}

namespace {

template <class Fn>
void parallel_for(std::size_t n, int parallelism, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, parallelism));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (workers == 1 || n <= 1) {
    work();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(work);
}

}  // namespace

std::vector<CellClassification> sweep(const std::vector<GridPoint>& cells, const MacroParams& params,
                                      const MacroState& x0, int parallelism,
                                      const ClassifyOptions& opt) {
  std::vector<CellClassification> out(cells.size());
  parallel_for(cells.size(), parallelism, [&](std::size_t i) {
    try {
      out[i] = classify_point(cells[i].mu_p, cells[i].mu_q, params, x0, opt);
    } catch (const std::exception& e) {
      CellClassification c;
      c.mu_p = cells[i].mu_p;
      c.mu_q = cells[i].mu_q;
      c.trajectory_only = true;
      c.note = std::string("error: ") + e.what();
      out[i] = c;
    }
  });
  return out;
}

std::string sweep_csv(const std::vector<CellClassification>& cells) {
  std::ostringstream os;
  os << "mu_p,mu_q,class,max_re_eig,time_to_converge_or_distance,stop,trajectory_only\n";
  for (const auto& c : cells) {
    const double tail = c.cls == CellClass::converged_green ? c.time_to_converge : c.distance;
    os << fmt(c.mu_p) << ',' << fmt(c.mu_q) << ',' << to_string(c.cls) << ','
       << (c.has_eigen ? fmt(c.max_real) : std::string("nan")) << ',' << fmt(tail) << ','
       << (c.cls == CellClass::unstable_red ? std::string("not_integrated")
                                           : integrator::to_string(c.stop.kind))
       << ',' << (c.trajectory_only ? 1 : 0) << '\n';
  }
  return os.str();
}

Sensitivity parameter_sensitivity(const MacroParams& p, const MacroState& x_eq,
                                  const std::vector<std::string>& names) {
  Sensitivity s;
  s.names = names;
  s.d.resize(kNumFree, static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (!macro::param_member(names[j])) {
      throw ConfigError(names[j], "unknown parameter '" + names[j] + "'");
    }
    const double v = macro::get_param(p, names[j]);
    const double h = numeric::fd_step(v);
    auto at = [&](double value) {
      MacroParams q = p;
      macro::set_param(q, names[j], value);
      const auto r = macro::evaluate(macro::build_model(q), x_eq).free_rates();
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(r.data(), kNumFree));
    };
    s.d.col(static_cast<Eigen::Index>(j)) = (at(v + h) - at(v - h)) / (2.0 * h);
  }
  return s;
}

namespace {

struct Production {
  std::string name;
  double (*get)(const MacroState&, const macro::DependentQuantities&);
};

const std::vector<Production>& production_fields() {
  static const std::vector<Production> f = {
      {"P_f1", [](const MacroState&, const macro::DependentQuantities& d) { return d.P_f1; }},
      {"P_f2", [](const MacroState&, const macro::DependentQuantities& d) { return d.P_f2; }},
      {"K_f1", [](const MacroState& x, const macro::DependentQuantities&) { return x[Var::K_f1]; }},
      {"K_f2", [](const MacroState& x, const macro::DependentQuantities&) { return x[Var::K_f2]; }},
      {"L_f1", [](const MacroState&, const macro::DependentQuantities& d) { return d.L_f1; }},
      {"L_f2", [](const MacroState&, const macro::DependentQuantities& d) { return d.L_f2; }},
      {"A_12", [](const MacroState& x, const macro::DependentQuantities&) { return x[Var::A_12]; }},
      {"A_21", [](const MacroState& x, const macro::DependentQuantities&) { return x[Var::A_21]; }},
      {"S_f1", [](const MacroState& x, const macro::DependentQuantities&) { return x[Var::S_f1]; }},
      {"S_f2", [](const MacroState& x, const macro::DependentQuantities&) { return x[Var::S_f2]; }},
  };
  return f;
}

const std::vector<Production>& split_fields() {
  static const std::vector<Production> f = {
      {"D_f1", [](const MacroState& x, const macro::DependentQuantities&) { return x[Var::D_f1]; }},
      {"D_f2", [](const MacroState& x, const macro::DependentQuantities&) { return x[Var::D_f2]; }},
      {"D_f1/E_f1",
       [](const MacroState& x, const macro::DependentQuantities& d) { return x[Var::D_f1] / d.E_f1; }},
      {"D_f2/E_f2",
       [](const MacroState& x, const macro::DependentQuantities& d) { return x[Var::D_f2] / d.E_f2; }},
      {"L_a1/L_f1",
       [](const MacroState& x, const macro::DependentQuantities& d) { return x[Var::L_a1] / d.L_f1; }},
      {"L_a2/L_f2",
       [](const MacroState& x, const macro::DependentQuantities& d) { return x[Var::L_a2] / d.L_f2; }},
  };
  return f;
}

std::vector<Spread> spreads(const std::vector<Production>& fields,
                            const std::vector<const MacroState*>& xs, const MacroParams& p) {
  std::vector<Spread> out;
  std::vector<macro::DependentQuantities> ds;
  for (auto* x : xs) ds.push_back(macro::dependents(*x, p));
  for (const auto& f : fields) {
    Spread s{f.name, 0.0};
    if (!xs.empty()) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = f.get(*xs[i], ds[i]);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
      }
      const double mean = sum / static_cast<double>(xs.size());
      s.rel = (hi - lo) / std::max(std::abs(mean), 1e-300);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

GlobalStudyReport randomized_global_study(const MacroParams& p, const MacroState& base, int n_runs,
                                          std::uint64_t seed, double sigma,
                                          const GlobalOptions& opt) {
  if (n_runs < 1) throw ConfigError("n_runs", "n_runs must be at least 1");
  if (!(sigma >= 0.0)) throw ConfigError("sigma", "perturbation scale must be non-negative");
  GlobalStudyReport rep;
  rep.params = p;
  rep.sigma = sigma;
  rep.seed = seed;
  rep.runs.resize(static_cast<std::size_t>(n_runs));

  std::vector<bool> drawn(rep.runs.size(), false);
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    auto& run = rep.runs[i];
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(sq);
    run.seed = rng();
    std::mt19937_64 draw(run.seed);
    for (int attempt = 0; attempt <= opt.max_redraws; ++attempt) {
      const MacroState x = macro::perturb(base, sigma, draw);
      if (macro::admissible(x, p)) {
        run.initial = x;
        run.redraws = attempt;
        drawn[i] = true;
        break;
      }
    }
  }
  if (std::none_of(drawn.begin(), drawn.end(), [](bool b) { return b; })) {
    throw SolverError("global study: every draw was infeasible");
  }

  parallel_for(rep.runs.size(), opt.parallelism, [&](std::size_t i) {
    auto& run = rep.runs[i];
    if (!drawn[i]) {
      run.outcome.note = "no feasible draw";
      run.outcome.stop.kind = integrator::StopKind::solver_abort;
      run.outcome.stop.diagnostic = "no feasible draw within the redraw limit";
      return;
    }
    try {
      run.outcome = run_to_rest(p, run.initial, opt.horizon, opt.convergence_tol);
    } catch (const std::exception& e) {
      run.outcome.stop.kind = integrator::StopKind::solver_abort;
      run.outcome.stop.diagnostic = e.what();
    }
  });

  std::vector<const MacroState*> fps;
  for (const auto& r : rep.runs) {
    if (r.converged()) fps.push_back(&r.outcome.fixed_point->x);
  }
  rep.converged = static_cast<int>(fps.size());
  rep.production = spreads(production_fields(), fps, p);
  rep.splits = spreads(split_fields(), fps, p);
  return rep;
}

std::string to_json(const ReducedJacobian& j, const EigenReport& e) {
  nlohmann::ordered_json o;
  auto& names = o["variables"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < kNumFree; ++i) names.push_back(macro::kRateNames[i]);
  auto& rows = o["jacobian"] = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < j.J.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index k = 0; k < j.J.cols(); ++k) row.push_back(j.J(i, k));
    rows.push_back(row);
  }
  o["steps"] = j.steps;
  o["one_sided_columns"] = j.one_sided;
  o["richardson_max_rel"] = j.richardson_max_rel;
  o["warnings"] = j.warnings;
  auto& ev = o["eigenvalues"] = nlohmann::ordered_json::array();
  for (auto z : e.eigenvalues) ev.push_back({z.real(), z.imag()});
  o["zero_space"] = {{"spectral_radius", e.spectral_radius},
                     {"threshold", e.threshold},
                     {"near_zero_eigenvalues", e.near_zero},
                     {"null_space_dimension", e.null_space.cols()},
                     {"gap_ratio", e.gap_ratio},
                     {"angle_labor_swap", e.angle_labor_swap},
                     {"angle_financing_swap", e.angle_financing_swap},
                     {"span_angle", e.span_angle}};
  o["max_real_nonzero"] = e.max_real;
  return o.dump(2);
}

std::string to_json(const Sensitivity& s) {
  nlohmann::ordered_json o;
  for (std::size_t j = 0; j < s.names.size(); ++j) {
    auto& col = o[s.names[j]];
    for (std::size_t i = 0; i < kNumFree; ++i) {
      col[macro::kRateNames[i]] = s.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return o.dump(2);
}

std::string to_json(const GlobalStudyReport& r) {
  nlohmann::ordered_json o;
  o["sigma"] = r.sigma;
  o["seed"] = r.seed;
  o["converged_runs"] = r.converged;
  auto& runs = o["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : r.runs) {
    nlohmann::ordered_json j;
    j["seed"] = run.seed;
    j["redraws"] = run.redraws;
    for (std::size_t i = 0; i < kNumFree; ++i) j["initial"][macro::kRateNames[i]] = run.initial.values[i];
    j["stop"] = integrator::to_string(run.outcome.stop.kind);
    j["stop_time"] = run.outcome.stop.time;
    j["stop_variable"] = run.outcome.stop.variable;
    j["converged"] = run.converged();
    if (run.outcome.converge_time) j["time_to_converge"] = *run.outcome.converge_time;
    if (run.outcome.fixed_point) {
      const auto& x = run.outcome.fixed_point->x;
      const auto d = macro::dependents(x, r.params);
      for (const auto& f : production_fields()) j["fixed_point"]["production"][f.name] = f.get(x, d);
      for (const auto& f : split_fields()) j["fixed_point"]["splits"][f.name] = f.get(x, d);
    }
    if (!run.outcome.note.empty()) j["note"] = run.outcome.note;
    runs.push_back(j);
  }
  for (const auto& s : r.production) o["production_spread"][s.name] = s.rel;
  for (const auto& s : r.splits) o["split_spread"][s.name] = s.rel;
  return o.dump(2);
}

}  // namespace gcd::stability
