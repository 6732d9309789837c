#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gcd/errors.hpp"

namespace gcd::numeric {

/// Relative central-difference increment used for Jacobians.
inline double fd_step(double x, double rel = 1e-6) { return rel * std::max(1.0, std::abs(x)); }

/// Columns that had to fall back to a one-sided difference.
using OneSidedColumns = std::vector<Eigen::Index>;

/// Central-difference Jacobian of f: R^n -> R^m at x. A column whose
/// perturbation leaves the domain (f throws DomainError) falls back to a
/// one-sided difference and is listed in `one_sided` when given.
template <class F>
Eigen::MatrixXd central_jacobian(F&& f, const Eigen::VectorXd& x, double rel = 1e-6,
                                 OneSidedColumns* one_sided = nullptr) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd j(f0.size(), x.size());
  auto eval = [&](Eigen::Index k, double h, Eigen::VectorXd& out) {
    Eigen::VectorXd xs = x;
    xs[k] += h;
    try {
      out = f(xs);
      return true;
    } catch (const DomainError&) {
      return false;
    }
  };
  Eigen::VectorXd fp, fm;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = fd_step(x[k], rel);
    const bool up = eval(k, h, fp);
    const bool down = eval(k, -h, fm);
    if (up && down) {
      j.col(k) = (fp - fm) / (2.0 * h);
      continue;
    }
    if (!up && !down) throw DomainError("", "Jacobian column has no feasible perturbation");
    j.col(k) = up ? Eigen::VectorXd((fp - f0) / h) : Eigen::VectorXd((f0 - fm) / h);
    if (one_sided) one_sided->push_back(k);
  }
  return j;
}

}  // namespace gcd::numeric
