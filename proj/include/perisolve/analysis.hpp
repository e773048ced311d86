#ifndef PERISOLVE_ANALYSIS_HPP
#define PERISOLVE_ANALYSIS_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perisolve/integrator.hpp"
#include "perisolve/linalg.hpp"
#include "perisolve/model.hpp"

namespace perisolve::analysis {

// Hypotheses verified on loaded models:
//   H0  every coefficient is omega-periodic (numeric check)
//   H1  d_i(t) > 0 and a_ij(t) >= 0
//   H2  some u >> 0 with (D(t) - A(t)) u >= 0 for all t, > 0 somewhere
//       (strict: uniformly positive margin)
//   H3  beta_i(t) > 0 for all i, t
//   H4  birth nonlinearities nonnegative, bounded, vanishing at 0 with unit
//       slope and a positive lower envelope (holds analytically for the
//       built-in variants with positive c(t))
//   H5  some v >> 0 with M(t) v >> 0 for all t
enum class HypothesisStatus { Satisfied, SatisfiedWeak, Failed, NotCheckable };

const char* to_string(HypothesisStatus status);

struct HypothesisEntry {
  HypothesisStatus status = HypothesisStatus::NotCheckable;
  double margin = 0.0;
  double worst_t = 0.0;
  std::string note;
};

struct HypothesisReport {
  std::array<HypothesisEntry, 6> entries;  // H0..H5
  std::optional<Eigen::VectorXd> witness_u;  // H2
  std::optional<Eigen::VectorXd> witness_v;  // H5
  int grid_points = 0;
  double omega = 0.0;
  std::vector<double> h2_margin_times;
  std::vector<double> h2_margin_profile;
  std::vector<double> h5_margin_times;
  std::vector<double> h5_margin_profile;
  std::vector<double> envelope_constants;  // per equation, worst-case c

  const HypothesisEntry& h(int k) const { return entries[static_cast<std::size_t>(k)]; }
  bool all_satisfied() const;  // weak counts as satisfied
  bool any_failed() const;
};

HypothesisReport check_hypotheses(const model::SystemModel& m, int grid_points = 256,
                                  int quad_nodes = 33);

/// Verifies a user-supplied H5 witness: margin of M(t)v over a 4x refined
/// grid (positive for acceptance).
double verify_h5_witness(const model::SystemModel& m, const Eigen::VectorXd& v,
                         int grid_points = 256, int quad_nodes = 33);

/// Scalar criterion: total birth coefficient exceeds the loss rate pointwise,
/// beta_1(t) - d(t) > 0 on the grid.
struct ScalarExcessBirth {
  bool holds = false;
  double margin = 0.0;
  double worst_t = 0.0;
};
ScalarExcessBirth check_scalar_excess_birth(const model::SystemModel& m, int grid_points = 256,
                                            int quad_nodes = 33);

/// Planar criterion for n = 2 with one dispersal coefficient per equation:
/// (i)  min_t d1/a1 > max_t a2/d2
/// (ii) some u >> 0 with  u1 (beta_1 - d1) + u2 a1 > 0  and
///                        u2 (beta_2 - d2) + u1 a2 > 0  for all t.
struct PlanarCriterion {
  bool holds = false;
  bool ratio_checkable = true;  // false when a1 vanishes somewhere
  bool ratio_condition = false;
  double ratio_min_d1_over_a1 = 0.0;
  double ratio_max_a2_over_d2 = 0.0;
  bool vector_condition = false;
  Eigen::VectorXd witness;
  std::string note;
};
PlanarCriterion check_planar_criterion(const model::SystemModel& m, int grid_points = 256,
                                       int quad_nodes = 33);

/// alpha_i(v) = min_t and gamma_i(v) = max_t of
///   beta_i(t) v_i / (d_i(t) v_i - sum_j a_ij(t) v_j),
/// grid extrema refined by golden section to 1e-10 in t. Throws when the
/// denominator is not positive on the grid.
std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_alpha_gamma(const model::SystemModel& m,
                                                                const Eigen::VectorXd& v,
                                                                int grid_points = 256,
                                                                int quad_nodes = 33);

struct AttractivityReport {
  Eigen::VectorXd v;
  Eigen::VectorXd alpha_i;
  Eigen::VectorXd gamma_i;
  bool ratios_defined = false;  // false when the denominator condition fails
  double c0 = 0.0;      // min_i v_i c_i^-
  double c0_sup = 0.0;  // max_i v_i c_i^+
  double threshold = 0.0;  // exp(2 c0 / c0_sup)
  bool delays_are_multiples = false;
  std::vector<int> delay_multiples;  // one entry per delay term, 0 if undetected
  double base_period = 0.0;          // omega-tilde used for the multiple test
  bool autonomous = false;
  bool extended_multi_delay = false;  // more than one delay term in some equation
  bool condition_met = false;
  std::string note;
};

/// Global-attractivity conditions for Ricker models with point delays that
/// are integer multiples of a common coefficient period:
/// condition_met = (min alpha_i(v) > 1) and (max gamma_i(v) < threshold) and
/// delays_are_multiples. For rationally dependent delays the coefficient
/// period is rescaled to omega/r (r <= 16) when every coefficient remains
/// periodic; fully constant coefficients accept any constant delay.
AttractivityReport check_attractivity(const model::SystemModel& m, const Eigen::VectorXd& v,
                                      int grid_points = 256, int quad_nodes = 33);

/// delta(x) = max_{y in [m, y_max]} |G_x(y)| with G_x the divided difference
/// of h(y) = y e^{-y} against the base point x, G_x(x) = (1-x) e^{-x}.
/// Dense 4096-point scan refined by golden section. Requires 0 < x < 2 and
/// 0 < m < 1; for those x the maximum stays strictly below e^{-x}.
double delta_of_x(double x, double m, double y_max = 50.0);

struct PermanenceEstimate {
  double m_emp = 0.0;
  double l_emp = 0.0;
  int trials = 0;
  int horizon_periods = 0;
  int tail_periods = 0;
  std::uint64_t seed = 0;
  bool all_positive = true;
};

/// Integrates seeded random constant histories (componentwise log-uniform in
/// [1e-3, 1e2]) and reports the min/max over the tail window. Trials run in
/// parallel; the draws are made up front so the result does not depend on the
/// thread count.
PermanenceEstimate estimate_permanence(const model::SystemModel& m, int trials = 20,
                                       int horizon_periods = 200, int tail_periods = 20,
                                       std::uint64_t seed = 0,
                                       const dde::SolverConfig& config = {});

/// Integrates two histories side by side and returns the sup difference over
/// the final period.
double convergence_experiment(const model::SystemModel& m, const dde::HistoryFunction& phi_a,
                              const dde::HistoryFunction& phi_b, int horizon_periods,
                              const dde::SolverConfig& config = {});

}  // namespace perisolve::analysis

#endif
