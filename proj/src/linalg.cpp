#include "perisolve/linalg.hpp"

#include <cmath>
#include <limits>

#include "perisolve/errors.hpp"
#include "perisolve/linprog.hpp"

namespace perisolve::linalg {

namespace {

Eigen::MatrixXd system_matrix(const model::SystemModel& m, double t) {
  return -model::d_minus_a(m, t);  // A(t) - D(t)
}

void check_lu_regular(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, const char* what) {
  const double scale = lu.matrixLU().cwiseAbs().maxCoeff();
  const double floor = 1e-13 * std::max(1.0, scale);
  for (int i = 0; i < lu.matrixLU().rows(); ++i)
    if (std::abs(lu.matrixLU()(i, i)) < floor)
      throw SolverError(std::string("singular factorization in ") + what);
}

}  // namespace

LinearFlowCache fundamental_matrix(const model::SystemModel& m, const dde::SolverConfig& config) {
  config.validate();
  const int n = m.n;
  const int grid = config.steps_per_period;
  const double h = m.omega / grid;

  LinearFlowCache cache;
  cache.omega = m.omega;
  cache.grid_size = grid;
  cache.theta.resize(grid + 1);
  cache.x.resize(grid + 1);
  cache.x_lu.reserve(grid + 1);

  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(n, n);
  cache.theta[0] = 0.0;
  cache.x[0] = x;
  Eigen::MatrixXd k1(n, n), k2(n, n), k3(n, n), k4(n, n);
  for (int k = 0; k < grid; ++k) {
    const double t = k * h;
    k1 = system_matrix(m, t) * x;
    k2 = system_matrix(m, t + 0.5 * h) * (x + 0.5 * h * k1);
    k3 = system_matrix(m, t + 0.5 * h) * (x + 0.5 * h * k2);
    k4 = system_matrix(m, t + h) * (x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    cache.theta[k + 1] = (k + 1) * h;
    cache.x[k + 1] = x;
  }
  cache.monodromy = cache.x[grid];

  for (int k = 0; k <= grid; ++k) {
    cache.x_lu.emplace_back(cache.x[k]);
    check_lu_regular(cache.x_lu.back(), "fundamental matrix X(t)");
  }

  cache.rho = spectral_radius(cache.monodromy);

  cache.t_theta.resize(grid);
  cache.i_minus_t_lu.reserve(grid);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < grid; ++k) {
    const Eigen::MatrixXd t_k = cache.x[k] * cache.monodromy * cache.x_lu[k].inverse();
    cache.t_theta[k] = t_k;
    cache.i_minus_t_lu.emplace_back(identity - t_k);
  }
  return cache;
}

double spectral_radius(const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(c.rows());
  if (n == 0) throw Error("spectral_radius: empty matrix");
  if (c.minCoeff() < -1e-9)
    throw Error("spectral_radius: matrix has significantly negative entries");
  if (n == 1) return std::max(0.0, c(0, 0));

  // Shift by I: the Perron root of B + I is rho(B) + 1 for nonnegative B, and
  // the shift removes the cyclic case where plain power iteration stalls.
  const Eigen::MatrixXd b = c.cwiseMax(0.0) + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
  double lambda = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd w = b * v;
    const double norm = w.lpNorm<1>();
    if (norm == 0.0) return 0.0;
    lambda = norm;  // ||v||_1 == 1
    w /= norm;
    if (std::abs(lambda - prev) <= 1e-12 * std::max(1.0, lambda)) {
      // Collatz bounds certify the estimate for positive iterates.
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      const Eigen::VectorXd bw = b * w;
      for (int i = 0; i < n; ++i) {
        if (w(i) > 1e-14) {
          lo = std::min(lo, bw(i) / w(i));
          hi = std::max(hi, bw(i) / w(i));
        }
      }
      if (hi - lo <= 1e-10 * std::max(1.0, hi) || std::abs(lambda - prev) == 0.0)
        return lambda - 1.0;
    }
    prev = lambda;
    v = w;
  }
  // Stalled (possible for badly conditioned reducible matrices): dense solve.
  const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(c.cwiseMax(0.0), false)
                                   .eigenvalues();
  return eig.cwiseAbs().maxCoeff();
}

Eigen::VectorXd solve_I_minus_T(const LinearFlowCache& cache, int theta_index,
                                const Eigen::VectorXd& rhs) {
  if (theta_index < 0 || theta_index >= static_cast<int>(cache.i_minus_t_lu.size()))
    throw Error("solve_I_minus_T: theta index out of range");
  check_lu_regular(cache.i_minus_t_lu[theta_index], "(I - T(theta))");
  return cache.i_minus_t_lu[theta_index].solve(rhs);
}

double witness_min_margin(const std::vector<Eigen::MatrixXd>& matrices, const Eigen::VectorXd& v,
                          int* worst_index) {
  double worst = std::numeric_limits<double>::infinity();
  int at = 0;
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    const double margin = (matrices[k] * v).minCoeff();
    if (margin < worst) {
      worst = margin;
      at = static_cast<int>(k);
    }
  }
  if (worst_index) *worst_index = at;
  return worst;
}

namespace {

FeasibilityResult solve_feasibility_lp(const std::vector<Eigen::MatrixXd>& matrices,
                                       const std::vector<double>& times,
                                       const FeasibilityOptions& options) {
  if (matrices.empty()) throw Error("find_positive_vector: empty matrix list");
  const int n = static_cast<int>(matrices.front().rows());
  const int k_count = static_cast<int>(matrices.size());

  // Variables: v_1..v_n, delta_plus, delta_minus.
  const int vars = n + 2;
  const int rows = k_count * n + n;
  linprog::Problem lp;
  lp.a_ineq.setZero(rows, vars);
  lp.b_ineq.setZero(rows);
  int r = 0;
  for (int k = 0; k < k_count; ++k) {
    for (int i = 0; i < n; ++i, ++r) {
      lp.a_ineq.row(r).head(n) = matrices[k].row(i);
      if (options.couple_margin) {
        lp.a_ineq(r, n) = -1.0;
        lp.a_ineq(r, n + 1) = 1.0;
      }
    }
  }
  for (int i = 0; i < n; ++i, ++r) {
    lp.a_ineq(r, i) = 1.0;
    lp.a_ineq(r, n) = -1.0;
    lp.a_ineq(r, n + 1) = 1.0;
  }
  lp.a_eq.setOnes(1, vars);
  lp.a_eq(0, n) = 0.0;
  lp.a_eq(0, n + 1) = 0.0;
  lp.b_eq.resize(1);
  lp.b_eq(0) = static_cast<double>(n);
  lp.objective.setZero(vars);
  lp.objective(n) = 1.0;
  lp.objective(n + 1) = -1.0;

  const linprog::Solution sol = linprog::maximize(lp);
  if (sol.status == linprog::Status::IterationLimit)
    throw SolverError("find_positive_vector: simplex cycling guard exceeded");
  FeasibilityResult result;
  result.grid_points = k_count;
  if (sol.status != linprog::Status::Optimal) return result;  // never expected: always feasible

  result.lp_delta = sol.objective;
  result.witness = sol.x.head(n);
  int worst = 0;
  const double margin = witness_min_margin(matrices, result.witness, &worst);
  result.margin = std::min(result.lp_delta, margin);
  result.worst_time = times.empty() ? 0.0 : times[worst];
  result.found = result.lp_delta > options.found_threshold &&
                 result.witness.minCoeff() > options.found_threshold;
  if (options.couple_margin) result.found = result.found && margin > options.found_threshold;
  return result;
}

void fill_margin_profile(const std::vector<Eigen::MatrixXd>& matrices,
                         const std::vector<double>& times, const Eigen::VectorXd& v,
                         FeasibilityResult& result) {
  result.margin_times = times;
  result.margin_profile.resize(matrices.size());
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    result.margin_profile[k] = (matrices[k] * v).minCoeff();
    if (result.margin_profile[k] < worst) {
      worst = result.margin_profile[k];
      result.worst_time = times[k];
    }
  }
}

}  // namespace

FeasibilityResult find_positive_vector(const std::vector<Eigen::MatrixXd>& matrices,
                                       const std::vector<double>& times,
                                       const FeasibilityOptions& options) {
  std::vector<double> t = times;
  if (t.empty()) {
    t.resize(matrices.size());
    for (std::size_t k = 0; k < matrices.size(); ++k) t[k] = static_cast<double>(k);
  }
  FeasibilityResult result = solve_feasibility_lp(matrices, t, options);
  if (result.witness.size() > 0) fill_margin_profile(matrices, t, result.witness, result);
  return result;
}

FeasibilityResult find_positive_vector(const std::function<Eigen::MatrixXd(double)>& matrix_at,
                                       double omega, int grid_points,
                                       const FeasibilityOptions& options) {
  if (grid_points < 2) throw Error("find_positive_vector: need at least 2 grid points");
  int solve_points = grid_points;
  FeasibilityResult result;
  for (int attempt = 0; attempt <= options.max_refinements; ++attempt) {
    std::vector<Eigen::MatrixXd> mats(solve_points);
    std::vector<double> times(solve_points);
    for (int k = 0; k < solve_points; ++k) {
      times[k] = omega * k / solve_points;
      mats[k] = matrix_at(times[k]);
    }
    result = solve_feasibility_lp(mats, times, options);
    result.refinements = attempt;

    // Verify the witness on a 4x finer grid before accepting it.
    const int fine_points = solve_points * 4;
    std::vector<Eigen::MatrixXd> fine(fine_points);
    std::vector<double> fine_times(fine_points);
    for (int k = 0; k < fine_points; ++k) {
      fine_times[k] = omega * k / fine_points;
      fine[k] = matrix_at(fine_times[k]);
    }
    if (result.witness.size() > 0) fill_margin_profile(fine, fine_times, result.witness, result);

    if (!result.found) return result;
    const double fine_margin = witness_min_margin(fine, result.witness, nullptr);
    const double required = options.couple_margin ? options.found_threshold : -1e-9;
    if (fine_margin > required) {
      result.margin = std::min(result.margin, fine_margin);
      return result;
    }
    result.found = false;
    solve_points = fine_points;
  }
  return result;
}

bool is_nonsingular_m_matrix(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error("is_nonsingular_m_matrix: matrix must be square");
  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && a(i, j) > 1e-12)
        throw Error("is_nonsingular_m_matrix: positive off-diagonal entry");
  const FeasibilityResult r = find_positive_vector({a}, {0.0});
  return r.found;
}

}  // namespace perisolve::linalg
