#ifndef PERISOLVE_LINPROG_HPP
#define PERISOLVE_LINPROG_HPP

#include <Eigen/Dense>

namespace perisolve::linprog {

/// maximize objective . x
/// subject to a_ineq x >= b_ineq, a_eq x = b_eq, x >= 0.
struct Problem {
  Eigen::MatrixXd a_ineq;
  Eigen::VectorXd b_ineq;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd objective;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

/// Dense two-phase simplex. Dantzig pricing with a switch to Bland's rule
/// after a stretch of non-improving (degenerate) pivots, which also serves as
/// the anti-cycling guard.
Solution maximize(const Problem& problem, int max_iterations = 200000);

}  // namespace perisolve::linprog

#endif
