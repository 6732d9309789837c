#pragma once

// Generic assembly and solution of a constrained-dynamics system.
//
// A model is a set of rate variables x_i, behavioral force terms
// mu_ji * f_ji(x) acting on them, and constraints 0 = Z_k(x, xdot) that are
// closed with Lagrangian multipliers: every constraint k adds lambda_k * c_ki
// to the rate of each variable i it touches. Because each residual is affine
// in xdot and xdot is affine in lambda, the multipliers follow from one dense
// K x K linear solve per evaluation point.
//
// All functions here are pure. The model-specific per-point data (levels,
// dependents, effective parameters) lives in the context type `Ctx`, built
// once per point by ModelDefinition::prepare.

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcd/errors.hpp"

namespace gcd::core {

struct VariableId {
  std::size_t index = 0;
  std::string name;
};

template <class Ctx>
struct ForceTerm {
  std::string agent;
  std::size_t variable = 0;
  std::string power_name;
  std::function<double(const Ctx&)> power;
  std::function<double(const Ctx&)> force;
};

template <class Ctx>
struct Coefficient {
  std::size_t variable = 0;
  std::function<double(const Ctx&)> value;
};

template <class Ctx>
struct ConstraintDef {
  std::string name;
  std::function<double(const Ctx&, std::span<const double> rates)> residual;
  std::vector<Coefficient<Ctx>> coefficients;
  std::vector<std::size_t> affects_derivative;
};

/// Rate of a variable that carries no force and no constraint coefficient but
/// is fixed after the multiplier solve (e.g. a price reacting to lambda).
/// Rules run in declaration order and may read rates assigned before them.
template <class Ctx>
struct RateRule {
  std::size_t variable = 0;
  std::function<double(const Ctx&, std::span<const double> rates,
                       std::span<const double> lambdas)>
      rate;
};

template <class Ctx>
struct ModelDefinition {
  std::vector<VariableId> variables;
  std::vector<ForceTerm<Ctx>> forces;
  std::vector<ConstraintDef<Ctx>> constraints;
  std::vector<RateRule<Ctx>> rate_rules;
  /// Builds the per-point context; throws DomainError on infeasible states.
  std::function<Ctx(std::span<const double> state, double time)> prepare;

  std::size_t num_variables() const { return variables.size(); }
  std::size_t num_constraints() const { return constraints.size(); }

  void validate() const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (variables[i].index != i) {
        throw ModelError("variable '" + variables[i].name +
                         "' breaks contiguous indexing");
      }
    }
    if (constraints.size() > variables.size()) {
      throw ModelError("more Lagrangian constraints than variables");
    }
    auto in_range = [&](std::size_t v) { return v < variables.size(); };
    for (const auto& f : forces) {
      if (!in_range(f.variable)) throw ModelError("force on unknown variable");
    }
    for (const auto& c : constraints) {
      for (const auto& co : c.coefficients) {
        if (!in_range(co.variable)) {
          throw ModelError("constraint '" + c.name +
                           "' has a coefficient on an unknown variable");
        }
      }
      for (auto v : c.affects_derivative) {
        if (!in_range(v)) throw ModelError("constraint '" + c.name + "' affects unknown rate");
      }
    }
    for (const auto& r : rate_rules) {
      if (!in_range(r.variable)) throw ModelError("rate rule on unknown variable");
    }
  }
};

struct MultiplierSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

struct MultiplierSolution {
  std::vector<double> lambdas;
  double condition = 1.0;
};

struct ExPost {
  std::vector<double> rates;
  MultiplierSolution multipliers;
};

/// Dense LU with partial pivoting, gated on the reciprocal condition
/// estimate. Throws ConstraintDegeneracy when cond(A) > max_condition.
MultiplierSolution solve_multipliers(const Eigen::MatrixXd& a,
                                     const Eigen::VectorXd& b,
                                     double max_condition = 1e12);

namespace detail {

template <class Ctx>
std::vector<double> forces_only(const ModelDefinition<Ctx>& model, const Ctx& ctx) {
  std::vector<double> rates(model.num_variables(), 0.0);
  for (const auto& term : model.forces) {
    const double mu = term.power(ctx);
    if (mu == 0.0) continue;
    const double f = term.force(ctx);
    if (!std::isfinite(f)) {
      throw DomainError(model.variables[term.variable].name,
                        "force of agent '" + term.agent + "' on '" +
                            model.variables[term.variable].name + "' is not finite");
    }
    rates[term.variable] += mu * f;
  }
  return rates;
}

// Column m holds the constraint-force coefficients c_m of constraint m.
template <class Ctx>
Eigen::MatrixXd coefficient_matrix(const ModelDefinition<Ctx>& model, const Ctx& ctx) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(model.num_variables()),
      static_cast<Eigen::Index>(model.num_constraints()));
  for (std::size_t k = 0; k < model.constraints.size(); ++k) {
    for (const auto& co : model.constraints[k].coefficients) {
      c(static_cast<Eigen::Index>(co.variable), static_cast<Eigen::Index>(k)) += co.value(ctx);
    }
  }
  return c;
}

template <class Ctx>
std::vector<double> combine(const ModelDefinition<Ctx>& model, const Ctx& ctx,
                            const std::vector<double>& forces, const Eigen::MatrixXd& coeffs,
                            std::span<const double> lambdas) {
  std::vector<double> rates = forces;
  for (Eigen::Index k = 0; k < coeffs.cols(); ++k) {
    const double lam = lambdas[static_cast<std::size_t>(k)];
    if (lam == 0.0) continue;
    for (Eigen::Index i = 0; i < coeffs.rows(); ++i) {
      rates[static_cast<std::size_t>(i)] += lam * coeffs(i, k);
    }
  }
  for (const auto& rule : model.rate_rules) {
    rates[rule.variable] = rule.rate(ctx, rates, lambdas);
  }
  return rates;
}

template <class Ctx>
std::vector<double> residuals(const ModelDefinition<Ctx>& model, const Ctx& ctx,
                              std::span<const double> rates) {
  std::vector<double> z(model.num_constraints());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = model.constraints[k].residual(ctx, rates);
  return z;
}

template <class Ctx>
MultiplierSystem assemble(const ModelDefinition<Ctx>& model, const Ctx& ctx,
                          const std::vector<double>& forces, const Eigen::MatrixXd& coeffs) {
  const std::size_t k_count = model.num_constraints();
  MultiplierSystem sys{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k_count),
                                             static_cast<Eigen::Index>(k_count)),
                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k_count))};
  if (k_count == 0) return sys;
  std::vector<double> lam(k_count, 0.0);
  const auto base_rates = combine(model, ctx, forces, coeffs, lam);
  const auto base = residuals(model, ctx, base_rates);
  for (std::size_t m = 0; m < k_count; ++m) {
    lam.assign(k_count, 0.0);
    lam[m] = 1.0;
    const auto rates = combine(model, ctx, forces, coeffs, lam);
    const auto z = residuals(model, ctx, rates);
    for (std::size_t k = 0; k < k_count; ++k) {
      sys.matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = z[k] - base[k];
    }
  }
  for (std::size_t k = 0; k < k_count; ++k) sys.rhs(static_cast<Eigen::Index>(k)) = -base[k];
  return sys;
}

}  // namespace detail

/// Planned rates: power-weighted forces with every lambda held at zero
/// (rate rules are applied with zero multipliers).
template <class Ctx>
std::vector<double> ex_ante_derivative(const ModelDefinition<Ctx>& model, const Ctx& ctx) {
  const auto forces = detail::forces_only(model, ctx);
  const auto coeffs = detail::coefficient_matrix(model, ctx);
  std::vector<double> zero(model.num_constraints(), 0.0);
  return detail::combine(model, ctx, forces, coeffs, zero);
}

template <class Ctx>
std::vector<double> ex_ante_derivative(const ModelDefinition<Ctx>& model,
                                       std::span<const double> state, double time) {
  return ex_ante_derivative(model, model.prepare(state, time));
}

/// Rates for an arbitrary multiplier vector; the building block of the
/// closure and of independent root-finding checks.
template <class Ctx>
std::vector<double> derivative_with_multipliers(const ModelDefinition<Ctx>& model, const Ctx& ctx,
                                                std::span<const double> lambdas) {
  if (lambdas.size() != model.num_constraints()) {
    throw ModelError("multiplier vector has wrong length");
  }
  const auto forces = detail::forces_only(model, ctx);
  const auto coeffs = detail::coefficient_matrix(model, ctx);
  return detail::combine(model, ctx, forces, coeffs, lambdas);
}

template <class Ctx>
std::vector<double> constraint_residuals(const ModelDefinition<Ctx>& model, const Ctx& ctx,
                                         std::span<const double> rates) {
  return detail::residuals(model, ctx, rates);
}

template <class Ctx>
MultiplierSystem assemble_multiplier_system(const ModelDefinition<Ctx>& model, const Ctx& ctx) {
  const auto forces = detail::forces_only(model, ctx);
  const auto coeffs = detail::coefficient_matrix(model, ctx);
  return detail::assemble(model, ctx, forces, coeffs);
}

template <class Ctx>
MultiplierSystem assemble_multiplier_system(const ModelDefinition<Ctx>& model,
                                            std::span<const double> state, double time) {
  return assemble_multiplier_system(model, model.prepare(state, time));
}

template <class Ctx>
ExPost ex_post_derivative(const ModelDefinition<Ctx>& model, const Ctx& ctx,
                          double max_condition = 1e12) {
  const auto forces = detail::forces_only(model, ctx);
  const auto coeffs = detail::coefficient_matrix(model, ctx);
  const auto sys = detail::assemble(model, ctx, forces, coeffs);
  ExPost out;
  out.multipliers = solve_multipliers(sys.matrix, sys.rhs, max_condition);
  out.rates = detail::combine(model, ctx, forces, coeffs, out.multipliers.lambdas);
  return out;
}

template <class Ctx>
ExPost ex_post_derivative(const ModelDefinition<Ctx>& model, std::span<const double> state,
                          double time, double max_condition = 1e12) {
  return ex_post_derivative(model, model.prepare(state, time), max_condition);
}

/// Checks that every constraint residual is affine in lambda by comparing the
/// residuals at 0, lambda, 2*lambda and a random lambda' against the
/// assembled linear map. Relative tolerance 1e-9.
template <class Ctx>
bool verify_affinity(const ModelDefinition<Ctx>& model, const Ctx& ctx, unsigned seed = 12345u) {
  const std::size_t k_count = model.num_constraints();
  if (k_count == 0) return true;
  const auto forces = detail::forces_only(model, ctx);
  const auto coeffs = detail::coefficient_matrix(model, ctx);
  const auto sys = detail::assemble(model, ctx, forces, coeffs);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> probe(k_count), other(k_count), doubled(k_count), zero(k_count, 0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    probe[k] = uni(rng);
    other[k] = uni(rng);
    doubled[k] = 2.0 * probe[k];
  }
  auto z_at = [&](const std::vector<double>& lam) {
    return detail::residuals(model, ctx, detail::combine(model, ctx, forces, coeffs, lam));
  };
  const auto z0 = z_at(zero);
  const auto z1 = z_at(probe);
  const auto z2 = z_at(doubled);
  const auto zr = z_at(other);

  for (std::size_t k = 0; k < k_count; ++k) {
    double pred1 = z0[k], predr = z0[k], scale = std::abs(z0[k]);
    for (std::size_t m = 0; m < k_count; ++m) {
      const double a = sys.matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
      pred1 += a * probe[m];
      predr += a * other[m];
      scale += std::abs(a);
    }
    scale = std::max(scale, 1.0);
    const double tol = 1e-9 * scale;
    if (std::abs(z1[k] - pred1) > tol) return false;
    if (std::abs(zr[k] - predr) > tol) return false;
    // collinearity along the probe direction
    if (std::abs((z2[k] - z1[k]) - (z1[k] - z0[k])) > tol) return false;
  }
  return true;
}

template <class Ctx>
bool verify_affinity(const ModelDefinition<Ctx>& model, std::span<const double> state,
                     double time) {
  return verify_affinity(model, model.prepare(state, time));
}

}  // namespace gcd::core
