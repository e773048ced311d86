#include "perisolve/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "perisolve/analysis.hpp"
#include "perisolve/errors.hpp"

namespace perisolve::periodic {

namespace {

inline double hermite(double y0, double y1, double d0, double d1, double dt, double u) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * dt * d0 + (-2 * u3 + 3 * u2) * y1 +
         (u3 - u2) * dt * d1;
}

inline double hermite_derivative(double y0, double y1, double d0, double d1, double dt,
                                 double u) {
  const double u2 = u * u;
  return ((6 * u2 - 6 * u) * y0 + (3 * u2 - 4 * u + 1) * dt * d0 + (-6 * u2 + 6 * u) * y1 +
          (3 * u2 - 2 * u) * dt * d1) /
         dt;
}

// Delayed birth terms M_i(t, phi) on the periodic extension of phi.
void eval_delay_terms(const model::SystemModel& m, double t, const PeriodicProfile& phi,
                      int quad_nodes, double* out) {
  for (int i = 0; i < m.n; ++i) {
    double v = 0.0;
    for (const model::DelayTerm& term : m.equations[i].terms) {
      const double beta = term.beta(t);
      if (beta == 0.0) continue;
      if (term.kernel.type == model::KernelType::Discrete) {
        const double x = std::max(0.0, phi.eval(t - term.kernel.tau(t), i));
        v += beta * term.nonlinearity(t, x);
      } else {
        const double tau = term.kernel.tau(t);
        if (tau <= 0.0) continue;
        const double h = tau / (quad_nodes - 1);
        double integral = 0.0;
        for (int q = 0; q < quad_nodes; ++q) {
          const double s = t - tau + q * h;
          const double x = std::max(0.0, phi.eval(s, i));
          const double g = term.kernel.gamma(s) * term.nonlinearity(s, x);
          integral += (q == 0 || q == quad_nodes - 1) ? 0.5 * g : g;
        }
        v += beta * integral * h;
      }
    }
    out[i] = v;
  }
}

// 4th-order per-segment weights for running integrals of grid samples:
// exact for cubics, O(h^4) overall.
void prefix_integrals(const std::vector<Eigen::VectorXd>& g, double h,
                      std::vector<Eigen::VectorXd>& prefix) {
  const int segments = static_cast<int>(g.size()) - 1;
  prefix.resize(g.size());
  prefix[0] = Eigen::VectorXd::Zero(g.front().size());
  for (int k = 0; k < segments; ++k) {
    Eigen::VectorXd seg;
    if (segments < 3) {
      seg = 0.5 * h * (g[k] + g[k + 1]);
    } else if (k == 0) {
      seg = h / 24.0 * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]);
    } else if (k == segments - 1) {
      seg = h / 24.0 *
            (9.0 * g[segments] + 19.0 * g[segments - 1] - 5.0 * g[segments - 2] +
             g[segments - 3]);
    } else {
      seg = h / 24.0 * (-g[k - 1] + 13.0 * g[k] + 13.0 * g[k + 1] - g[k + 2]);
    }
    prefix[k + 1] = prefix[k] + seg;
  }
}

void require_operator_inputs(const model::SystemModel& m, const linalg::LinearFlowCache& cache,
                             const PeriodicProfile& phi) {
  if (phi.components() != m.n)
    throw Error("apply_operator: profile component count does not match the model");
  if (std::abs(phi.omega() - m.omega) > 1e-12 * (1.0 + m.omega))
    throw Error("apply_operator: profile period does not match the model");
  if (cache.grid_size != phi.grid_size())
    throw Error("apply_operator: profile and flow cache grids differ");
  if (!(cache.rho < 1.0))
    throw SolverError("apply_operator: monodromy spectral radius " + std::to_string(cache.rho) +
                      " is not < 1");
}

}  // namespace

PeriodicProfile::PeriodicProfile(double omega, int grid_size, int components)
    : omega_(omega), grid_(grid_size), n_(components) {
  if (!(omega > 0.0) || grid_size < 4 || components < 1)
    throw Error("PeriodicProfile: invalid dimensions");
  values_.assign(static_cast<std::size_t>(grid_) * n_, 0.0);
  derivs_.assign(values_.size(), 0.0);
}

PeriodicProfile PeriodicProfile::constant(double omega, int grid_size,
                                          const Eigen::VectorXd& value) {
  PeriodicProfile p(omega, grid_size, static_cast<int>(value.size()));
  for (int k = 0; k < grid_size; ++k)
    for (int i = 0; i < p.n_; ++i) p.values_[static_cast<std::size_t>(k) * p.n_ + i] = value(i);
  return p;  // derivatives stay zero
}

PeriodicProfile PeriodicProfile::from_values(double omega, int grid_size, int components,
                                             std::vector<double> values) {
  PeriodicProfile p(omega, grid_size, components);
  if (values.size() != p.values_.size())
    throw Error("PeriodicProfile::from_values: size mismatch");
  p.values_ = std::move(values);
  p.rebuild_derivatives();
  return p;
}

void PeriodicProfile::rebuild_derivatives() {
  const double h = omega_ / grid_;
  for (int k = 0; k < grid_; ++k) {
    const int km2 = (k - 2 + 2 * grid_) % grid_;
    const int km1 = (k - 1 + grid_) % grid_;
    const int kp1 = (k + 1) % grid_;
    const int kp2 = (k + 2) % grid_;
    for (int i = 0; i < n_; ++i) {
      const auto at = [&](int idx) { return values_[static_cast<std::size_t>(idx) * n_ + i]; };
      derivs_[static_cast<std::size_t>(k) * n_ + i] =
          (8.0 * (at(kp1) - at(km1)) - (at(kp2) - at(km2))) / (12.0 * h);
    }
  }
}

double PeriodicProfile::eval(double t, int i) const {
  double u = std::fmod(t, omega_);
  if (u < 0.0) u += omega_;
  const double h = omega_ / grid_;
  int k = static_cast<int>(u / h);
  if (k >= grid_) k = grid_ - 1;
  const int kp1 = (k + 1) % grid_;
  const double local = std::clamp((u - k * h) / h, 0.0, 1.0);
  return hermite(value(k, i), value(kp1, i), derivs_[static_cast<std::size_t>(k) * n_ + i],
                 derivs_[static_cast<std::size_t>(kp1) * n_ + i], h, local);
}

void PeriodicProfile::eval(double t, double* out) const {
  for (int i = 0; i < n_; ++i) out[i] = eval(t, i);
}

double PeriodicProfile::derivative(double t, int i) const {
  double u = std::fmod(t, omega_);
  if (u < 0.0) u += omega_;
  const double h = omega_ / grid_;
  int k = static_cast<int>(u / h);
  if (k >= grid_) k = grid_ - 1;
  const int kp1 = (k + 1) % grid_;
  const double local = std::clamp((u - k * h) / h, 0.0, 1.0);
  return hermite_derivative(value(k, i), value(kp1, i),
                            derivs_[static_cast<std::size_t>(k) * n_ + i],
                            derivs_[static_cast<std::size_t>(kp1) * n_ + i], h, local);
}

double PeriodicProfile::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double PeriodicProfile::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

Eigen::VectorXd PeriodicProfile::componentwise_max() const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n_, -std::numeric_limits<double>::infinity());
  for (int k = 0; k < grid_; ++k)
    for (int i = 0; i < n_; ++i) out(i) = std::max(out(i), value(k, i));
  return out;
}

double PeriodicProfile::sup_distance(const PeriodicProfile& other) const {
  if (other.components() != n_) throw Error("sup_distance: component mismatch");
  if (std::abs(other.omega() - omega_) > 1e-9 * (1.0 + omega_))
    throw Error("sup_distance: period mismatch");
  const int samples = 4 * std::max(grid_, other.grid_size());
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = omega_ * k / samples;
    for (int i = 0; i < n_; ++i)
      worst = std::max(worst, std::abs(eval(t, i) - other.eval(t, i)));
  }
  return worst;
}

namespace {

PeriodicProfile apply_operator_impl(const model::SystemModel& m,
                                    const linalg::LinearFlowCache& cache,
                                    const PeriodicProfile& phi, int quad_nodes, bool parallel) {
  require_operator_inputs(m, cache, phi);
  const int grid = cache.grid_size;
  const int n = m.n;
  const double h = m.omega / grid;

  std::vector<Eigen::VectorXd> g(grid + 1);
  std::string first_error;

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (int k = 0; k <= grid; ++k) {
    try {
      Eigen::VectorXd mk(n);
      eval_delay_terms(m, cache.theta[k], phi, quad_nodes, mk.data());
      g[k] = cache.x_lu[k].solve(mk);
    } catch (const std::exception& e) {
      // exceptions must not escape the parallel region
#ifdef _OPENMP
#pragma omp critical
#endif
      if (first_error.empty()) first_error = e.what();
      g[k] = Eigen::VectorXd::Zero(n);
    }
  }
  if (!first_error.empty())
    throw SolverError("apply_operator: " + first_error);

  std::vector<Eigen::VectorXd> prefix;
  prefix_integrals(g, h, prefix);
  const Eigen::VectorXd total = prefix[grid];

  std::vector<double> out(static_cast<std::size_t>(grid) * n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (int k = 0; k < grid; ++k) {
    const Eigen::VectorXd forced =
        cache.x[k] * (cache.monodromy * (total - prefix[k]) + prefix[k]);
    Eigen::VectorXd f = cache.i_minus_t_lu[k].solve(forced);
    for (int i = 0; i < n; ++i) {
      double value = f(i);
      if (value < 0.0 && value > -1e-12) value = 0.0;
      out[static_cast<std::size_t>(k) * n + i] = value;
    }
  }
  return PeriodicProfile::from_values(m.omega, grid, n, std::move(out));
}

}  // namespace

PeriodicProfile apply_operator(const model::SystemModel& m, const linalg::LinearFlowCache& cache,
                               const PeriodicProfile& phi, int quad_nodes, Execution exec) {
  return apply_operator_impl(m, cache, phi, quad_nodes, exec == Execution::Parallel);
}

PeriodicProfile apply_operator_reference(const model::SystemModel& m,
                                         const linalg::LinearFlowCache& cache,
                                         const PeriodicProfile& phi, int quad_nodes) {
  require_operator_inputs(m, cache, phi);
  const int grid = cache.grid_size;
  const int n = m.n;
  const double h = m.omega / grid;

  std::vector<Eigen::VectorXd> g(grid + 1);
  for (int k = 0; k <= grid; ++k) {
    Eigen::VectorXd mk(n);
    eval_delay_terms(m, cache.theta[k], phi, quad_nodes, mk.data());
    g[k] = cache.x_lu[k].solve(mk);
  }
  std::vector<Eigen::VectorXd> prefix;
  prefix_integrals(g, h, prefix);

  std::vector<double> out(static_cast<std::size_t>(grid) * n);
  for (int k = 0; k < grid; ++k) {
    const Eigen::VectorXd forced =
        cache.x[k] * (cache.monodromy * (prefix[grid] - prefix[k]) + prefix[k]);
    const Eigen::VectorXd f = cache.i_minus_t_lu[k].solve(forced);
    for (int i = 0; i < n; ++i) {
      double value = f(i);
      if (value < 0.0 && value > -1e-12) value = 0.0;
      out[static_cast<std::size_t>(k) * n + i] = value;
    }
  }
  return PeriodicProfile::from_values(m.omega, grid, n, std::move(out));
}

std::pair<PeriodicProfile, FixedPointDiagnostics> find_periodic_fixed_point(
    const model::SystemModel& m, const linalg::LinearFlowCache& cache,
    const PeriodicProfile& init, const FixedPointOptions& options,
    const dde::SolverConfig& config) {
  PeriodicProfile phi = init;
  FixedPointDiagnostics diag;
  double damping = options.damping;
  const int n_values = phi.grid_size() * phi.components();

  std::vector<double> previous_update;
  double previous_delta = std::numeric_limits<double>::infinity();
  int oscillating = 0;
  int stalled = 0;
  double stall_reference = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= options.max_iterations; ++it) {
    diag.iterations = it;
    const PeriodicProfile f_phi = apply_operator(m, cache, phi, config.quad_nodes);

    std::vector<double> update(n_values);
    double raw_delta = 0.0;
    double dot = 0.0;
    for (int idx = 0; idx < n_values; ++idx) {
      update[idx] = f_phi.values()[idx] - phi.values()[idx];
      raw_delta = std::max(raw_delta, std::abs(update[idx]));
      if (!previous_update.empty()) dot += update[idx] * previous_update[idx];
    }

    std::vector<double> mixed(n_values);
    for (int idx = 0; idx < n_values; ++idx)
      mixed[idx] = std::max(0.0, phi.values()[idx] + damping * update[idx]);
    phi = PeriodicProfile::from_values(m.omega, phi.grid_size(), phi.components(),
                                       std::move(mixed));
    diag.final_delta = damping * raw_delta;

    if (raw_delta <= options.tolerance) break;

    // Oscillation: persistent direction flips without much decay.
    if (!previous_update.empty() && dot < 0.0 && raw_delta > 0.9 * previous_delta)
      ++oscillating;
    else
      oscillating = 0;
    // Stall: no meaningful progress over a longer window.
    if (++stalled >= 25) {
      if (raw_delta > 0.97 * stall_reference) oscillating = 10;
      stalled = 0;
      stall_reference = raw_delta;
    }
    if (stall_reference == std::numeric_limits<double>::infinity()) stall_reference = raw_delta;

    if (oscillating >= 10 && damping > 1.0 / 64.0) {
      damping *= 0.5;
      oscillating = 0;
      diag.notes.push_back("damping halved to " + std::to_string(damping) + " at iteration " +
                           std::to_string(it));
    }

    previous_update = std::move(update);
    previous_delta = raw_delta;
  }

  diag.damping_final = damping;
  const PeriodicProfile f_final = apply_operator(m, cache, phi, config.quad_nodes);
  double residual = 0.0;
  for (int idx = 0; idx < n_values; ++idx)
    residual = std::max(residual, std::abs(f_final.values()[idx] - phi.values()[idx]));
  diag.operator_residual = residual;
  diag.converged =
      diag.final_delta <= options.tolerance && residual <= 10.0 * options.tolerance;
  if (phi.min_value() > 0.0)
    diag.dde_residual = dde_residual(m, phi, config);
  else
    diag.notes.push_back("profile touches zero; re-integration residual skipped");
  return {phi, diag};
}

namespace {

dde::HistoryFunction tail_shifted(const dde::HistoryFunction& history, double t_from,
                                  double t_to) {
  dde::HistoryFunction out(history.components());
  std::size_t first = 0;
  for (std::size_t k = 0; k < history.knots(); ++k) {
    if (history.knot_time(k) <= t_from) first = k;
    else break;
  }
  std::vector<double> value(history.components()), deriv(history.components());
  for (std::size_t k = first; k < history.knots(); ++k) {
    for (int i = 0; i < history.components(); ++i) {
      value[static_cast<std::size_t>(i)] = history.knot_value(k, i);
      deriv[static_cast<std::size_t>(i)] = history.knot_derivative(k, i);
    }
    out.append(history.knot_time(k) - t_to, value, deriv);
  }
  return out;
}

}  // namespace

std::pair<PeriodicProfile, PoincareDiagnostics> find_periodic_poincare(
    const model::SystemModel& m, const dde::HistoryFunction& init,
    const dde::SolverConfig& config, const PoincareOptions& options) {
  config.validate();
  if (options.max_periods < 2) throw Error("find_periodic_poincare: need max_periods >= 2");
  PoincareDiagnostics diag;
  const int grid = config.steps_per_period;
  const int n = m.n;
  const double h = m.omega / grid;
  const double tail_span = std::max(m.tau_max + 2.0 * h, m.omega / 2.0);

  dde::HistoryFunction rolling = init;
  std::vector<double> previous, current(static_cast<std::size_t>(grid) * n);
  for (int period = 1; period <= options.max_periods; ++period) {
    const dde::Trajectory trajectory = dde::integrate(m, rolling, m.omega, config);
    for (int k = 0; k < grid; ++k) {
      const std::vector<double> x = trajectory.history.eval(k * h);
      for (int i = 0; i < n; ++i) current[static_cast<std::size_t>(k) * n + i] = x[i];
    }
    diag.periods = period;
    if (!previous.empty()) {
      double gap = 0.0;
      for (std::size_t idx = 0; idx < current.size(); ++idx)
        gap = std::max(gap, std::abs(current[idx] - previous[idx]));
      diag.final_gap = gap;
      if (gap <= options.tolerance) {
        diag.converged = true;
        return {PeriodicProfile::from_values(m.omega, grid, n, std::move(current)), diag};
      }
    }
    previous = current;
    rolling = tail_shifted(trajectory.history, m.omega - tail_span, m.omega);
  }
  return {PeriodicProfile::from_values(m.omega, grid, n, std::move(current)), diag};
}

dde::HistoryFunction history_from_profile(const PeriodicProfile& phi, double t_begin,
                                          int steps_per_period) {
  const double h = phi.omega() / steps_per_period;
  const int steps = static_cast<int>(std::ceil(-t_begin / h - 1e-12));
  dde::HistoryFunction history(phi.components());
  std::vector<double> value(phi.components()), deriv(phi.components());
  for (int j = -steps; j <= 0; ++j) {
    const double t = j * h;
    for (int i = 0; i < phi.components(); ++i) {
      value[static_cast<std::size_t>(i)] = std::max(0.0, phi.eval(t, i));
      deriv[static_cast<std::size_t>(i)] = phi.derivative(t, i);
    }
    history.append(t, value, deriv);
  }
  return history;
}

double dde_residual(const model::SystemModel& m, const PeriodicProfile& phi,
                    const dde::SolverConfig& config) {
  config.validate();
  if (!(phi.min_value() > 0.0))
    throw Error("dde_residual: profile must be strictly positive");
  const double h = m.omega / config.steps_per_period;
  const double span = std::max(m.tau_max + 2.0 * h, m.omega);
  const dde::HistoryFunction history =
      history_from_profile(phi, -span, config.steps_per_period);
  const dde::Trajectory trajectory = dde::integrate(m, history, m.omega, config);
  double worst = 0.0;
  for (int k = 0; k <= config.steps_per_period; ++k) {
    const double t = k * h;
    const std::vector<double> x = trajectory.history.eval(std::min(t, m.omega));
    for (int i = 0; i < m.n; ++i) worst = std::max(worst, std::abs(x[i] - phi.eval(t, i)));
  }
  return worst;
}

EquilibriumResult find_equilibrium(const model::SystemModel& m, int quad_nodes) {
  if (!m.autonomous)
    throw SolverError("find_equilibrium: model coefficients are not constant");
  const int n = m.n;
  EquilibriumResult result;

  const Eigen::MatrixXd loss = model::d_minus_a(m, 0.0);
  try {
    result.loss_matrix_nonsingular_m = linalg::is_nonsingular_m_matrix(loss);
  } catch (const Error&) {
    result.loss_matrix_nonsingular_m = false;
  }
  const model::MatrixBundle bundle = model::community_matrices(m, 0.0, quad_nodes);
  result.community_condition = linalg::find_positive_vector({bundle.m}, {0.0}).found;

  // Per-term constant weights: beta * kernel mass at t = 0.
  std::vector<std::vector<double>> weights(n);
  for (int i = 0; i < n; ++i) {
    for (const model::DelayTerm& term : m.equations[i].terms) {
      double w = term.beta(0.0);
      if (term.kernel.type == model::KernelType::Density) {
        const double tau = term.kernel.tau(0.0);
        if (tau <= 0.0) {
          w = 0.0;
        } else {
          const double hq = tau / (quad_nodes - 1);
          double integral = 0.5 * (term.kernel.gamma(-tau) + term.kernel.gamma(0.0));
          for (int q = 1; q < quad_nodes - 1; ++q)
            integral += term.kernel.gamma(-tau + q * hq);
          w *= integral * hq;
        }
      }
      weights[i].push_back(w);
    }
  }

  const auto residual_of = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = -loss * x;
    for (int i = 0; i < n; ++i) {
      const auto& eq = m.equations[i];
      for (std::size_t k = 0; k < eq.terms.size(); ++k)
        g(i) += weights[i][k] * eq.terms[k].nonlinearity(0.0, x(i));
    }
    return g;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  bool all_ricker = true;
  for (int i = 0; i < n; ++i)
    for (const model::DelayTerm& term : m.equations[i].terms)
      if (term.nonlinearity.type != model::NonlinearityType::Ricker) all_ricker = false;
  if (all_ricker) {
    try {
      x = 0.5 * ricker_profile_bound(m, Eigen::VectorXd::Ones(n), 64, quad_nodes);
      for (int i = 0; i < n; ++i)
        if (!(x(i) > 0.0)) x(i) = 1.0;
    } catch (const Error&) {
      x = Eigen::VectorXd::Ones(n);
    }
  }

  Eigen::VectorXd g = residual_of(x);
  double norm = g.lpNorm<Eigen::Infinity>();
  for (int it = 1; it <= 200; ++it) {
    result.iterations = it;
    if (norm <= 1e-12) break;
    Eigen::MatrixXd jac = -loss;
    for (int i = 0; i < n; ++i) {
      const auto& eq = m.equations[i];
      for (std::size_t k = 0; k < eq.terms.size(); ++k)
        jac(i, i) += weights[i][k] * eq.terms[k].nonlinearity.derivative(0.0, x(i));
    }
    const Eigen::VectorXd step = jac.partialPivLu().solve(-g);
    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      Eigen::VectorXd candidate = x + lambda * step;
      if (candidate.minCoeff() > 0.0) {
        const Eigen::VectorXd g_new = residual_of(candidate);
        const double norm_new = g_new.lpNorm<Eigen::Infinity>();
        if (norm_new < norm) {
          x = candidate;
          g = g_new;
          norm = norm_new;
          improved = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!improved)
      throw SolverError("find_equilibrium: Newton stagnation at residual " +
                        std::to_string(norm));
    if (it == 200 && norm > 1e-12)
      throw SolverError("find_equilibrium: Newton stagnation after 200 iterations");
  }
  result.x = x;
  result.residual = norm;
  return result;
}

Eigen::VectorXd ricker_profile_bound(const model::SystemModel& m, const Eigen::VectorXd& v,
                                     int grid_points, int quad_nodes) {
  const int n = m.n;
  if (v.size() != n) throw Error("ricker_profile_bound: witness size mismatch");
  if (!(v.minCoeff() > 0.0)) throw Error("ricker_profile_bound: witness must be positive");
  for (int i = 0; i < n; ++i) {
    if (m.equations[i].terms.empty())
      throw SolverError("ricker_profile_bound: equation without birth terms");
    for (const model::DelayTerm& term : m.equations[i].terms)
      if (term.nonlinearity.type != model::NonlinearityType::Ricker)
        throw SolverError("ricker_profile_bound: requires Ricker nonlinearities");
  }
  const auto [alpha, gamma] = analysis::compute_alpha_gamma(m, v, grid_points, quad_nodes);
  for (int i = 0; i < n; ++i)
    if (!(alpha(i) > 1.0))
      throw SolverError("ricker_profile_bound: alpha_" + std::to_string(i + 1) +
                        "(v) <= 1, bound hypotheses fail");
  double worst = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    double c_minus = std::numeric_limits<double>::infinity();
    for (const model::DelayTerm& term : m.equations[j].terms)
      c_minus = std::min(c_minus, term.nonlinearity.c_min);
    worst = std::max(worst, std::log(gamma(j)) / (v(j) * c_minus));
  }
  return v * worst;
}

PeriodicProfile default_initial_profile(const model::SystemModel& m, int grid_size) {
  Eigen::VectorXd init = Eigen::VectorXd::Ones(m.n);
  bool all_ricker = true;
  for (const model::Equation& eq : m.equations)
    for (const model::DelayTerm& term : eq.terms)
      if (term.nonlinearity.type != model::NonlinearityType::Ricker) all_ricker = false;
  if (all_ricker) {
    try {
      const Eigen::VectorXd bound =
          ricker_profile_bound(m, Eigen::VectorXd::Ones(m.n), 128, 33);
      if (bound.minCoeff() > 0.0) init = 0.5 * bound;
    } catch (const Error&) {
      // fall back to ones
    }
  }
  return PeriodicProfile::constant(m.omega, grid_size, init);
}

}  // namespace perisolve::periodic
