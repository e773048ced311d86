#include "perisolve/linprog.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "perisolve/errors.hpp"

namespace perisolve::linprog {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

struct Tableau {
  Eigen::MatrixXd body;      // m x total columns, kept in canonical (B^-1 A) form
  Eigen::VectorXd rhs;       // m, kept nonnegative
  std::vector<int> basis;    // basic column per row
  int iterations = 0;

  int rows() const { return static_cast<int>(body.rows()); }
  int cols() const { return static_cast<int>(body.cols()); }

  void pivot(int row, int col) {
    const double p = body(row, col);
    body.row(row) /= p;
    rhs(row) /= p;
    for (int i = 0; i < rows(); ++i) {
      if (i == row) continue;
      const double factor = body(i, col);
      if (factor == 0.0) continue;
      body.row(i) -= factor * body.row(row);
      rhs(i) -= factor * rhs(row);
      if (rhs(i) < 0.0 && rhs(i) > -1e-12) rhs(i) = 0.0;
    }
    basis[row] = col;
    ++iterations;
  }
};

// Minimizes cost . x over the current tableau. Columns with allowed[j] == 0
// may not enter the basis.
Status run_simplex(Tableau& t, const Eigen::VectorXd& cost, const std::vector<char>& allowed,
                   int max_iterations) {
  const int m = t.rows();
  const int total = t.cols();
  Eigen::VectorXd reduced(total);
  int stalled = 0;
  bool bland = false;
  double last_objective = std::numeric_limits<double>::infinity();

  while (t.iterations < max_iterations) {
    // reduced costs r = c - c_B^T (B^-1 A)
    reduced = cost;
    for (int i = 0; i < m; ++i) {
      const double cb = cost(t.basis[i]);
      if (cb != 0.0) reduced -= cb * t.body.row(i).transpose();
    }

    int entering = -1;
    if (bland) {
      for (int j = 0; j < total; ++j)
        if (allowed[j] && reduced(j) < -kCostTol) {
          entering = j;
          break;
        }
    } else {
      double best = -kCostTol;
      for (int j = 0; j < total; ++j)
        if (allowed[j] && reduced(j) < best) {
          best = reduced(j);
          entering = j;
        }
    }
    if (entering < 0) return Status::Optimal;

    int leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = t.body(i, entering);
      if (a > kPivotTol) {
        const double ratio = t.rhs(i) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && leaving >= 0 && t.basis[i] < t.basis[leaving])) {
          best_ratio = ratio;
          leaving = i;
        }
      }
    }
    if (leaving < 0) return Status::Unbounded;

    t.pivot(leaving, entering);

    double objective = 0.0;
    for (int i = 0; i < m; ++i) objective += cost(t.basis[i]) * t.rhs(i);
    if (objective < last_objective - 1e-12) {
      stalled = 0;
      last_objective = objective;
    } else if (!bland && ++stalled > 2 * m + 20) {
      bland = true;  // degenerate stretch: Bland's rule guarantees termination
    }
  }
  return Status::IterationLimit;
}

}  // namespace

Solution maximize(const Problem& problem, int max_iterations) {
  const int n = static_cast<int>(problem.objective.size());
  const int m_ineq = static_cast<int>(problem.a_ineq.rows());
  const int m_eq = static_cast<int>(problem.a_eq.rows());
  const int m = m_ineq + m_eq;
  if ((m_ineq > 0 && problem.a_ineq.cols() != n) || (m_eq > 0 && problem.a_eq.cols() != n))
    throw Error("linprog: constraint matrix width does not match the objective");

  // Columns: structural n, slacks m_ineq, artificials (added as needed).
  const int n_slack = m_ineq;
  std::vector<int> artificial_of_row(m, -1);
  int n_art = 0;

  Tableau t;
  t.basis.assign(m, -1);
  Eigen::MatrixXd base(m, n + n_slack);
  base.setZero();
  Eigen::VectorXd rhs(m);
  // a x >= b with b <= 0 is oriented as -a x + s = -b so the slack starts
  // basic; only rows with b > 0 (and equalities) need an artificial.
  for (int i = 0; i < m_ineq; ++i) {
    if (problem.b_ineq(i) <= 0.0) {
      base.row(i).head(n) = -problem.a_ineq.row(i);
      base(i, n + i) = 1.0;
      rhs(i) = -problem.b_ineq(i);
      t.basis[i] = n + i;
    } else {
      base.row(i).head(n) = problem.a_ineq.row(i);
      base(i, n + i) = -1.0;
      rhs(i) = problem.b_ineq(i);
    }
  }
  for (int i = 0; i < m_eq; ++i) {
    const double sign = problem.b_eq(i) < 0.0 ? -1.0 : 1.0;
    base.row(m_ineq + i).head(n) = sign * problem.a_eq.row(i);
    rhs(m_ineq + i) = sign * problem.b_eq(i);
  }
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < 0) artificial_of_row[i] = n_art++;

  const int total = n + n_slack + n_art;
  t.body.resize(m, total);
  t.body.setZero();
  t.body.leftCols(n + n_slack) = base;
  t.rhs = rhs;
  for (int i = 0; i < m; ++i) {
    if (artificial_of_row[i] >= 0) {
      const int col = n + n_slack + artificial_of_row[i];
      t.body(i, col) = 1.0;
      t.basis[i] = col;
    }
  }

  Solution solution;
  std::vector<char> allowed(total, 1);

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
    for (int j = n + n_slack; j < total; ++j) phase1(j) = 1.0;
    const Status s = run_simplex(t, phase1, allowed, max_iterations);
    if (s == Status::IterationLimit) {
      solution.status = s;
      solution.iterations = t.iterations;
      return solution;
    }
    double infeasibility = 0.0;
    for (int i = 0; i < t.rows(); ++i)
      if (t.basis[i] >= n + n_slack) infeasibility += t.rhs(i);
    if (infeasibility > 1e-7) {
      solution.status = Status::Infeasible;
      solution.iterations = t.iterations;
      return solution;
    }
    // Drive leftover degenerate artificials out of the basis when possible.
    for (int i = 0; i < t.rows(); ++i) {
      if (t.basis[i] < n + n_slack) continue;
      int col = -1;
      for (int j = 0; j < n + n_slack; ++j)
        if (std::abs(t.body(i, j)) > kPivotTol) {
          col = j;
          break;
        }
      if (col >= 0) t.pivot(i, col);
    }
  }

  for (int j = n + n_slack; j < total; ++j) allowed[j] = 0;
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(total);
  phase2.head(n) = -problem.objective;  // minimize the negation
  const Status s = run_simplex(t, phase2, allowed, max_iterations);
  solution.status = s;
  solution.iterations = t.iterations;
  if (s != Status::Optimal) return solution;

  solution.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < t.rows(); ++i)
    if (t.basis[i] < n) solution.x(t.basis[i]) = t.rhs(i);
  solution.objective = problem.objective.dot(solution.x);
  return solution;
}

}  // namespace perisolve::linprog
