#ifndef PERISOLVE_INTEGRATOR_HPP
#define PERISOLVE_INTEGRATOR_HPP

#include <span>
#include <string>
#include <vector>

#include "perisolve/model.hpp"

namespace perisolve::dde {

struct SolverConfig {
  int steps_per_period = 256;
  int quad_nodes = 33;
  double positivity_tolerance = 1e-10;

  void validate() const;  // steps_per_period >= 32, quad_nodes odd and >= 3
};

/// Dense piecewise-cubic (Hermite) solution segment. Knot times are strictly
/// increasing; each interior knot carries the state and its derivative, so
/// evaluation is C^1. Evaluation outside the span throws SolverError.
class HistoryFunction {
 public:
  HistoryFunction() = default;
  explicit HistoryFunction(int components) : n_(components) {}

  static HistoryFunction constant(int components, std::span<const double> value, double t0,
                                  double t1);

  void append(double t, std::span<const double> value, std::span<const double> deriv);

  void eval(double t, std::span<double> out) const;
  std::vector<double> eval(double t) const;
  double eval_component(double t, int i) const;

  int components() const { return n_; }
  std::size_t knots() const { return times_.size(); }
  double span_begin() const;
  double span_end() const;
  double knot_time(std::size_t k) const { return times_[k]; }
  double knot_value(std::size_t k, int i) const { return values_[k * n_ + i]; }
  double knot_derivative(std::size_t k, int i) const { return derivs_[k * n_ + i]; }

 private:
  std::size_t segment_index(double t) const;

  int n_ = 0;
  std::vector<double> times_;
  std::vector<double> values_;  // row-major, one row per knot
  std::vector<double> derivs_;
};

struct Trajectory {
  HistoryFunction history;
  SolverConfig config;
  std::string model_label;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Right side of the system at time t. Point kernels read the history at
/// t - tau(t); density kernels integrate gamma(s) h(s, x_i(s)) over
/// [t - tau(t), t] with a composite trapezoid on quad_nodes nodes.
std::vector<double> rhs(const model::SystemModel& m, double t, const HistoryFunction& history,
                        int quad_nodes);

/// Method of steps with classical RK4 at fixed step omega / steps_per_period.
/// Stage lookups use the committed dense history; lookups inside the current
/// step extend the last committed point linearly with the stage-0 derivative.
/// The initial history must lie in C0: componentwise >= 0 with every component
/// strictly positive at time 0. Components below -positivity_tolerance abort,
/// values in [-tolerance, 0] are clamped to zero.
///
/// A single integration is sequential and owns its history; any number of
/// integrations of the same immutable model may run concurrently.
Trajectory integrate(const model::SystemModel& m, const HistoryFunction& initial_history,
                     double t_end, const SolverConfig& config = {});

std::vector<double> sample(const Trajectory& trajectory, double t);

}  // namespace perisolve::dde

#endif
