#include "perisolve/integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "perisolve/errors.hpp"

namespace perisolve::dde {

namespace {

// Hermite basis on a normalised segment u in [0,1].
inline double hermite(double y0, double y1, double d0, double d1, double dt, double u) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * dt * d0 +
         (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * dt * d1;
}

// Delayed-state lookup during a step: committed history up to t_edge, then a
// linear extension from (t_edge, anchor) with the stage-0 derivative.
struct StageView {
  const HistoryFunction* history;
  double t_edge;
  const double* anchor;
  const double* slope;

  double component(double s, int i) const {
    if (s <= t_edge) return history->eval_component(s, i);
    return anchor[i] + (s - t_edge) * slope[i];
  }
};

void eval_rhs(const model::SystemModel& m, double t, const double* current,
              const StageView& view, int quad_nodes, double* out) {
  for (int i = 0; i < m.n; ++i) {
    const model::Equation& eq = m.equations[i];
    double v = -eq.d(t) * current[i];
    for (const auto& [j, a] : eq.off_diagonal) v += a(t) * current[j];
    for (const model::DelayTerm& term : eq.terms) {
      const double beta = term.beta(t);
      if (beta == 0.0) continue;
      if (term.kernel.type == model::KernelType::Discrete) {
        const double tau = term.kernel.tau(t);
        const double x = std::max(0.0, view.component(t - tau, i));
        v += beta * term.nonlinearity(t, x);
      } else {
        const double tau = term.kernel.tau(t);
        if (tau <= 0.0) continue;
        const double h = tau / (quad_nodes - 1);
        double integral = 0.0;
        for (int q = 0; q < quad_nodes; ++q) {
          const double s = t - tau + q * h;
          const double x = std::max(0.0, view.component(s, i));
          const double g = term.kernel.gamma(s) * term.nonlinearity(s, x);
          integral += (q == 0 || q == quad_nodes - 1) ? 0.5 * g : g;
        }
        v += beta * integral * h;
      }
    }
    out[i] = v;
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (steps_per_period < 32) throw Error("SolverConfig: steps_per_period must be >= 32");
  if (quad_nodes < 3 || quad_nodes % 2 == 0)
    throw Error("SolverConfig: quad_nodes must be odd and >= 3");
  if (positivity_tolerance < 0.0) throw Error("SolverConfig: positivity_tolerance must be >= 0");
}

HistoryFunction HistoryFunction::constant(int components, std::span<const double> value,
                                          double t0, double t1) {
  if (static_cast<int>(value.size()) != components)
    throw Error("HistoryFunction::constant: value size mismatch");
  if (!(t0 < t1)) throw Error("HistoryFunction::constant: need t0 < t1");
  HistoryFunction h(components);
  std::vector<double> zero(components, 0.0);
  h.append(t0, value, zero);
  h.append(t1, value, zero);
  return h;
}

void HistoryFunction::append(double t, std::span<const double> value,
                             std::span<const double> deriv) {
  if (static_cast<int>(value.size()) != n_ || static_cast<int>(deriv.size()) != n_)
    throw Error("HistoryFunction::append: size mismatch");
  // equal times are allowed: a zero-width knot pair carries two-sided
  // derivatives at a junction and is never selected as a segment
  if (!times_.empty() && t < times_.back())
    throw Error("HistoryFunction::append: knot times must not decrease");
  times_.push_back(t);
  values_.insert(values_.end(), value.begin(), value.end());
  derivs_.insert(derivs_.end(), deriv.begin(), deriv.end());
}

double HistoryFunction::span_begin() const {
  if (times_.empty()) throw SolverError("empty history");
  return times_.front();
}

double HistoryFunction::span_end() const {
  if (times_.empty()) throw SolverError("empty history");
  return times_.back();
}

std::size_t HistoryFunction::segment_index(double t) const {
  if (times_.size() < 2) throw SolverError("history has no segments");
  const double pad = 1e-9 * (1.0 + std::abs(times_.back()) + std::abs(times_.front()));
  if (t < times_.front() - pad || t > times_.back() + pad)
    throw SolverError("history evaluated outside its span: t = " + std::to_string(t) +
                      ", span [" + std::to_string(times_.front()) + ", " +
                      std::to_string(times_.back()) + "]");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = static_cast<std::size_t>(std::distance(times_.begin(), it));
  if (k == 0) k = 1;
  if (k >= times_.size()) k = times_.size() - 1;
  --k;
  while (k > 0 && times_[k + 1] <= times_[k]) --k;  // never land on a zero-width pair
  return k;
}

void HistoryFunction::eval(double t, std::span<double> out) const {
  const std::size_t k = segment_index(t);
  const double t0 = times_[k];
  const double t1 = times_[k + 1];
  const double dt = t1 - t0;
  const double u = std::clamp((t - t0) / dt, 0.0, 1.0);
  for (int i = 0; i < n_; ++i)
    out[i] = hermite(values_[k * n_ + i], values_[(k + 1) * n_ + i], derivs_[k * n_ + i],
                     derivs_[(k + 1) * n_ + i], dt, u);
}

std::vector<double> HistoryFunction::eval(double t) const {
  std::vector<double> out(n_);
  eval(t, out);
  return out;
}

double HistoryFunction::eval_component(double t, int i) const {
  const std::size_t k = segment_index(t);
  const double t0 = times_[k];
  const double dt = times_[k + 1] - t0;
  const double u = std::clamp((t - t0) / dt, 0.0, 1.0);
  return hermite(values_[k * n_ + i], values_[(k + 1) * n_ + i], derivs_[k * n_ + i],
                 derivs_[(k + 1) * n_ + i], dt, u);
}

std::vector<double> rhs(const model::SystemModel& m, double t, const HistoryFunction& history,
                        int quad_nodes) {
  std::vector<double> current = history.eval(t);  // span violations surface here
  std::vector<double> out(m.n);
  StageView view{&history, history.span_end(), current.data(), current.data()};
  eval_rhs(m, t, current.data(), view, quad_nodes, out.data());
  return out;
}

Trajectory integrate(const model::SystemModel& m, const HistoryFunction& initial_history,
                     double t_end, const SolverConfig& config) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  if (initial_history.components() != m.n)
    throw Error("integrate: history component count does not match the model");
  if (!(t_end > 0.0)) throw Error("integrate: t_end must be > 0");
  if (std::abs(initial_history.span_end()) > 1e-9)
    throw Error("integrate: initial history must end at t = 0");
  if (m.tau_max > 0.0 && initial_history.span_begin() > -m.tau_max + 1e-12)
    throw Error("integrate: initial history must cover [-tau_max, 0]");

  // Admissibility: componentwise nonnegative with a strictly positive value
  // at t = 0 (sampled at knots and segment midpoints).
  for (std::size_t k = 0; k < initial_history.knots(); ++k)
    for (int i = 0; i < m.n; ++i) {
      if (initial_history.knot_value(k, i) < 0.0)
        throw Error("integrate: initial history must be nonnegative");
      if (k + 1 < initial_history.knots()) {
        const double mid =
            0.5 * (initial_history.knot_time(k) + initial_history.knot_time(k + 1));
        if (initial_history.eval_component(mid, i) < 0.0)
          throw Error("integrate: initial history must be nonnegative");
      }
    }
  {
    const std::vector<double> x0 = initial_history.eval(initial_history.span_end());
    for (int i = 0; i < m.n; ++i)
      if (!(x0[i] > 0.0))
        throw Error("integrate: initial history must be strictly positive at t = 0");
  }

  Trajectory trajectory;
  trajectory.config = config;
  trajectory.model_label = m.label;
  trajectory.history = initial_history;

  const double h = m.omega / config.steps_per_period;
  if (m.equations.size() > 0 && m.tau_max > 0.0 && m.tau_min < h)
    trajectory.warnings.push_back(
        "delay falls below the step size somewhere on the period; stage lookups "
        "use the stage-0 linear extension there");

  HistoryFunction& hist = trajectory.history;
  const int n = m.n;
  std::vector<double> y = initial_history.eval(initial_history.span_end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n), y_next(n);

  // Two-sided junction knot: the right derivative of the solution at t = 0
  // generally differs from the history's left derivative, and the first
  // computed segment must interpolate with the right-side slope.
  {
    StageView view{&hist, hist.span_end(), y.data(), k1.data()};
    eval_rhs(m, hist.span_end(), y.data(), view, config.quad_nodes, k1.data());
    hist.append(hist.span_end(), y, k1);
  }

  double t = 0.0;
  const std::size_t total_steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
  for (std::size_t step = 0; step < total_steps; ++step) {
    const double dt = std::min(h, t_end - t);
    StageView view{&hist, t, y.data(), k1.data()};

    eval_rhs(m, t, y.data(), view, config.quad_nodes, k1.data());
    for (int i = 0; i < n; ++i) stage[i] = y[i] + 0.5 * dt * k1[i];
    eval_rhs(m, t + 0.5 * dt, stage.data(), view, config.quad_nodes, k2.data());
    for (int i = 0; i < n; ++i) stage[i] = y[i] + 0.5 * dt * k2[i];
    eval_rhs(m, t + 0.5 * dt, stage.data(), view, config.quad_nodes, k3.data());
    for (int i = 0; i < n; ++i) stage[i] = y[i] + dt * k3[i];
    eval_rhs(m, t + dt, stage.data(), view, config.quad_nodes, k4.data());

    const double t_next = (step + 1 == total_steps) ? t_end : t + dt;
    for (int i = 0; i < n; ++i) {
      y_next[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (y_next[i] < 0.0) {
        if (y_next[i] < -config.positivity_tolerance)
          throw PositivityError(t_next, i, y_next[i]);
        y_next[i] = 0.0;
      }
    }
    eval_rhs(m, t_next, y_next.data(), view, config.quad_nodes, k2.data());
    hist.append(t_next, y_next, k2);
    y = y_next;
    t = t_next;
  }

  trajectory.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trajectory;
}

std::vector<double> sample(const Trajectory& trajectory, double t) {
  return trajectory.history.eval(t);
}

}  // namespace perisolve::dde
