#ifndef PERISOLVE_PERIODIC_HPP
#define PERISOLVE_PERIODIC_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "perisolve/integrator.hpp"
#include "perisolve/linalg.hpp"
#include "perisolve/model.hpp"

namespace perisolve::periodic {

/// Candidate periodic solution: grid values over one period plus a periodic
/// cubic (Hermite) interpolant whose knot derivatives come from 4th-order
/// periodic finite differences. C^1 across the wrap by construction.
class PeriodicProfile {
 public:
  PeriodicProfile() = default;
  PeriodicProfile(double omega, int grid_size, int components);

  static PeriodicProfile constant(double omega, int grid_size,
                                  const Eigen::VectorXd& value);
  /// values.size() == grid_size * components, row-major by grid point.
  static PeriodicProfile from_values(double omega, int grid_size, int components,
                                     std::vector<double> values);

  double eval(double t, int i) const;
  void eval(double t, double* out) const;
  double derivative(double t, int i) const;

  double omega() const { return omega_; }
  int grid_size() const { return grid_; }
  int components() const { return n_; }
  double grid_time(int k) const { return omega_ * k / grid_; }
  double value(int k, int i) const { return values_[static_cast<std::size_t>(k) * n_ + i]; }
  const std::vector<double>& values() const { return values_; }

  double min_value() const;
  double max_value() const;
  /// max over i of max over grid of phi_i.
  Eigen::VectorXd componentwise_max() const;

  /// Sup-norm distance to another profile of the same period, sampled on a
  /// 4x refined common grid.
  double sup_distance(const PeriodicProfile& other) const;

  bool empty() const { return n_ == 0; }

 private:
  void rebuild_derivatives();
  double omega_ = 0.0;
  int grid_ = 0;
  int n_ = 0;
  std::vector<double> values_;
  std::vector<double> derivs_;
};

enum class Execution { Serial, Parallel };

/// One application of the periodic-solution operator
///   (F phi)(theta) = (I - T(theta))^{-1} X(theta) [ C (P(omega) - P(theta)) + P(theta) ],
/// where P(theta) is the running integral of X^{-1}(s) M(s, phi_s) over the
/// period grid and M collects the delayed birth terms evaluated on the
/// periodic extension of phi. Grid points are independent; the parallel
/// version distributes them with OpenMP.
PeriodicProfile apply_operator(const model::SystemModel& m, const linalg::LinearFlowCache& cache,
                               const PeriodicProfile& phi, int quad_nodes,
                               Execution exec = Execution::Parallel);

/// Plain serial implementation kept as the reference for testing the
/// parallel kernel; same arithmetic, straight loops.
PeriodicProfile apply_operator_reference(const model::SystemModel& m,
                                         const linalg::LinearFlowCache& cache,
                                         const PeriodicProfile& phi, int quad_nodes);

struct FixedPointDiagnostics {
  bool converged = false;
  int iterations = 0;
  double final_delta = 0.0;        // sup-norm of the last applied update
  double operator_residual = 0.0;  // ||F phi - phi||_inf at the returned iterate
  double dde_residual = 0.0;       // re-integration gap over one period
  double damping_final = 1.0;
  std::vector<std::string> notes;
};

struct FixedPointOptions {
  int max_iterations = 500;
  double tolerance = 1e-10;
  double damping = 1.0;
};

/// Picard iteration phi <- (1 - damping) phi + damping F phi with adaptive
/// damping: ten consecutive oscillating updates (direction flip with little
/// decay) or a 25-iteration stall halve the damping factor (floor 1/64).
/// Returns the last iterate with diagnostics whether or not it converged.
std::pair<PeriodicProfile, FixedPointDiagnostics> find_periodic_fixed_point(
    const model::SystemModel& m, const linalg::LinearFlowCache& cache,
    const PeriodicProfile& init, const FixedPointOptions& options = {},
    const dde::SolverConfig& config = {});

struct PoincareOptions {
  int max_periods = 400;
  double tolerance = 1e-8;
};

struct PoincareDiagnostics {
  bool converged = false;
  int periods = 0;
  double final_gap = 0.0;
};

/// Independent route: integrate forward and accept once consecutive periods
/// agree within tolerance in sup norm on the step grid.
std::pair<PeriodicProfile, PoincareDiagnostics> find_periodic_poincare(
    const model::SystemModel& m, const dde::HistoryFunction& init,
    const dde::SolverConfig& config = {}, const PoincareOptions& options = {});

/// Re-integration oracle: integrate one period with the periodic extension of
/// phi as initial history and return the sup-norm gap against phi.
double dde_residual(const model::SystemModel& m, const PeriodicProfile& phi,
                    const dde::SolverConfig& config = {});

/// History function sampling the periodic extension of phi on [t_begin, 0].
dde::HistoryFunction history_from_profile(const PeriodicProfile& phi, double t_begin,
                                          int steps_per_period);

struct EquilibriumResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0.0;
  bool loss_matrix_nonsingular_m = false;  // D - A admits u >> 0 with (D-A)u >> 0
  bool community_condition = false;        // M v >> 0 feasible
};

/// Damped Newton for the positive equilibrium of a constant-coefficient
/// model. Requires every coefficient constant within 1e-12 over the grid.
EquilibriumResult find_equilibrium(const model::SystemModel& m, int quad_nodes = 33);

/// A-priori componentwise sup bound for Ricker-only models:
/// bound_i = v_i * max_j( log(gamma_j(v)) / (v_j c_j^-) ). Requires
/// alpha_i(v) > 1 for all i.
Eigen::VectorXd ricker_profile_bound(const model::SystemModel& m, const Eigen::VectorXd& v,
                                     int grid_points = 256, int quad_nodes = 33);

/// Constant profile at half the Ricker bound (all-Ricker models with a usable
/// bound) or at one.
PeriodicProfile default_initial_profile(const model::SystemModel& m, int grid_size);

}  // namespace perisolve::periodic

#endif
