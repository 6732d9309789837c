#include "gcd/core.hpp"

#include <limits>
#include <sstream>

namespace gcd::core {

MultiplierSolution solve_multipliers(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                     double max_condition) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw ModelError("multiplier system is not square");
  }
  MultiplierSolution out;
  if (a.rows() == 0) return out;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition)) {
    std::ostringstream msg;
    msg << "constraint degeneracy: condition estimate " << cond << " exceeds " << max_condition;
    throw ConstraintDegeneracy(cond, msg.str());
  }
  Eigen::VectorXd lam = lu.solve(b);
  // one step of iterative refinement keeps ||A lam - b|| at roundoff level
  lam += lu.solve(b - a * lam);
  out.condition = cond;
  out.lambdas.assign(lam.data(), lam.data() + lam.size());
  return out;
}

}  // namespace gcd::core
