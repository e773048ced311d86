#ifndef PERISOLVE_LINALG_HPP
#define PERISOLVE_LINALG_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "perisolve/integrator.hpp"
#include "perisolve/model.hpp"

namespace perisolve::linalg {

/// Fundamental matrix X(t) of the linear homogeneous part x' = (A(t) - D(t))x
/// on the grid t_k = k omega / N, with X(0) = I, the monodromy matrix
/// C = X(omega), and cached LU factorizations of X(t_k) and of I - T(t_k)
/// where T(t) = X(t) C X(t)^{-1}. Immutable after construction; solves
/// against the cached factorizations are read-only and concurrency-safe.
struct LinearFlowCache {
  double omega = 0.0;
  int grid_size = 0;  // N; grids hold N+1 points including both endpoints
  std::vector<double> theta;
  std::vector<Eigen::MatrixXd> x;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> x_lu;
  Eigen::MatrixXd monodromy;
  double rho = 0.0;  // spectral radius of the monodromy matrix
  std::vector<Eigen::MatrixXd> t_theta;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> i_minus_t_lu;
};

LinearFlowCache fundamental_matrix(const model::SystemModel& m,
                                   const dde::SolverConfig& config = {});

/// Perron root of an (entrywise, up to -1e-9 noise) nonnegative matrix:
/// power iteration on max(C,0) + I with tolerance 1e-12 and at most 10000
/// iterations; falls back to a dense eigensolver if the iteration stalls.
double spectral_radius(const Eigen::MatrixXd& c);

/// Solves (I - T(theta_k)) y = rhs via the cached factorization.
Eigen::VectorXd solve_I_minus_T(const LinearFlowCache& cache, int theta_index,
                                const Eigen::VectorXd& rhs);

struct FeasibilityOptions {
  /// Couple the maximized margin into the matrix rows (M(t_k) v >= delta).
  /// When false the rows only require M(t_k) v >= 0 and delta measures
  /// interiority (v_i >= delta); used for weak-feasibility classification.
  bool couple_margin = true;
  double found_threshold = 1e-9;
  int max_refinements = 2;
};

struct FeasibilityResult {
  bool found = false;
  Eigen::VectorXd witness;
  double margin = 0.0;      // maximized delta, capped by the verification-grid minimum
  double worst_time = 0.0;  // time of the smallest componentwise margin
  double lp_delta = 0.0;    // raw LP optimum
  int grid_points = 0;
  int refinements = 0;
  std::vector<double> margin_times;    // verification grid
  std::vector<double> margin_profile;  // min_i (M(t) v)_i along margin_times
};

/// Searches for v >> 0 with M(t_k) v >> 0 for every supplied matrix:
/// maximize delta subject to M(t_k) v >= delta 1, v_i >= delta, sum v_i = n.
/// The list overload verifies on the same matrices; the generator overload
/// verifies on a 4x finer grid over [0, omega) and re-solves on the finer
/// grid on verification failure, at most max_refinements times.
FeasibilityResult find_positive_vector(const std::vector<Eigen::MatrixXd>& matrices,
                                       const std::vector<double>& times,
                                       const FeasibilityOptions& options = {});
FeasibilityResult find_positive_vector(const std::function<Eigen::MatrixXd(double)>& matrix_at,
                                       double omega, int grid_points,
                                       const FeasibilityOptions& options = {});

/// min over matrices of min_i (M v)_i, with the index of the worst matrix.
double witness_min_margin(const std::vector<Eigen::MatrixXd>& matrices,
                          const Eigen::VectorXd& v, int* worst_index = nullptr);

/// True iff the matrix (nonpositive off-diagonal entries required) admits
/// u >> 0 with A u >> 0, decided by the feasibility LP.
bool is_nonsingular_m_matrix(const Eigen::MatrixXd& a);

}  // namespace perisolve::linalg

#endif
