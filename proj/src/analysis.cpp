#include "perisolve/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "perisolve/errors.hpp"

namespace perisolve::analysis {

namespace {

constexpr double kStrictTol = 1e-9;

// Golden-section refinement of f around grid extremum bracket [a, b].
template <typename F>
double golden_extremum(const F& f, double a, double b, bool maximize, double tol_t) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol_t) {
    const bool pick_left = maximize ? (f1 > f2) : (f1 < f2);
    if (pick_left) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = f(xm);
  if (maximize) return std::max(fm, std::max(f1, f2));
  return std::min(fm, std::min(f1, f2));
}

struct GridExtrema {
  double min_value = std::numeric_limits<double>::infinity();
  double max_value = -std::numeric_limits<double>::infinity();
  int argmin = 0;
  int argmax = 0;
};

template <typename F>
GridExtrema scan_grid(const F& f, double omega, int points) {
  GridExtrema e;
  for (int k = 0; k < points; ++k) {
    const double v = f(omega * k / points);
    if (v < e.min_value) {
      e.min_value = v;
      e.argmin = k;
    }
    if (v > e.max_value) {
      e.max_value = v;
      e.argmax = k;
    }
  }
  return e;
}

bool expr_constant_on_grid(const model::PeriodicExpr& f, double omega, double* value) {
  if (f.is_constant()) {
    if (value) *value = f(0.0);
    return true;
  }
  const GridExtrema e = scan_grid([&](double t) { return f(t); }, omega, 512);
  if (e.max_value - e.min_value >= 1e-9) return false;
  if (value) *value = 0.5 * (e.max_value + e.min_value);
  return true;
}

}  // namespace

const char* to_string(HypothesisStatus status) {
  switch (status) {
    case HypothesisStatus::Satisfied: return "satisfied";
    case HypothesisStatus::SatisfiedWeak: return "satisfied-weak";
    case HypothesisStatus::Failed: return "failed";
    case HypothesisStatus::NotCheckable: return "not-checkable";
  }
  return "?";
}

bool HypothesisReport::all_satisfied() const {
  for (const HypothesisEntry& e : entries)
    if (e.status == HypothesisStatus::Failed || e.status == HypothesisStatus::NotCheckable)
      return false;
  return true;
}

bool HypothesisReport::any_failed() const {
  for (const HypothesisEntry& e : entries)
    if (e.status == HypothesisStatus::Failed) return true;
  return false;
}

HypothesisReport check_hypotheses(const model::SystemModel& m, int grid_points, int quad_nodes) {
  HypothesisReport report;
  report.grid_points = grid_points;
  report.omega = m.omega;

  // H0: numeric periodicity of every coefficient.
  {
    HypothesisEntry& h0 = report.entries[0];
    h0.status = HypothesisStatus::Satisfied;
    model::for_each_coefficient(m, [&](const std::string& name, const model::PeriodicExpr& f) {
      const auto check = expr::check_periodicity(*f.ast(), m.omega, 512);
      if (check.max_discrepancy > h0.margin) {
        h0.margin = check.max_discrepancy;
        h0.worst_t = check.worst_t;
      }
      if (!check.periodic) {
        h0.status = HypothesisStatus::Failed;
        h0.note = name + " is not periodic";
      }
    });
  }

  // H1: d_i(t) > 0, a_ij(t) >= 0.
  {
    HypothesisEntry& h1 = report.entries[1];
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.n; ++i) {
      const auto& eq = m.equations[i];
      GridExtrema e = scan_grid([&](double t) { return eq.d(t); }, m.omega, grid_points);
      if (e.min_value < worst) {
        worst = e.min_value;
        h1.worst_t = m.omega * e.argmin / grid_points;
      }
      for (const auto& [j, a] : eq.off_diagonal) {
        e = scan_grid([&](double t) { return a(t); }, m.omega, grid_points);
        if (e.min_value < worst) {
          worst = e.min_value;
          h1.worst_t = m.omega * e.argmin / grid_points;
        }
      }
    }
    h1.margin = worst;
    h1.status = worst > 0.0 ? HypothesisStatus::Satisfied : HypothesisStatus::Failed;
  }

  // H2: u >> 0 with (D - A) u >= 0 everywhere, strict somewhere. Strictness is
  // decided by the uniform-margin LP; the weak fallback asks for the most
  // interior u among those with nonnegative grid margins, then looks for a
  // grid time where every component is strictly positive.
  {
    HypothesisEntry& h2 = report.entries[2];
    const auto matrix_at = [&](double t) { return model::d_minus_a(m, t); };
    linalg::FeasibilityResult strict =
        linalg::find_positive_vector(matrix_at, m.omega, grid_points);
    if (strict.found) {
      h2.status = HypothesisStatus::Satisfied;
      h2.margin = strict.margin;
      h2.worst_t = strict.worst_time;
      report.witness_u = strict.witness;
      report.h2_margin_times = strict.margin_times;
      report.h2_margin_profile = strict.margin_profile;
    } else {
      linalg::FeasibilityOptions weak_options;
      weak_options.couple_margin = false;
      linalg::FeasibilityResult weak =
          linalg::find_positive_vector(matrix_at, m.omega, grid_points, weak_options);
      report.h2_margin_times = weak.margin_times;
      report.h2_margin_profile = weak.margin_profile;
      bool has_strict_time = false;
      double strict_time = 0.0;
      for (std::size_t k = 0; k < weak.margin_profile.size(); ++k) {
        if (weak.margin_profile[k] > kStrictTol) {
          has_strict_time = true;
          strict_time = weak.margin_times[k];
          break;
        }
      }
      if (weak.found && has_strict_time) {
        h2.status = HypothesisStatus::SatisfiedWeak;
        h2.margin =
            *std::min_element(weak.margin_profile.begin(), weak.margin_profile.end());
        h2.worst_t = weak.worst_time;
        h2.note = "no uniform margin; all components strictly positive at t = " +
                  std::to_string(strict_time);
        report.witness_u = weak.witness;
      } else {
        h2.status = HypothesisStatus::Failed;
        h2.margin = strict.lp_delta;
        h2.worst_t = strict.worst_time;
      }
    }
  }

  // H3: beta_i(t) > 0 on the grid.
  {
    HypothesisEntry& h3 = report.entries[3];
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.n; ++i) {
      const GridExtrema e = scan_grid(
          [&](double t) { return model::beta_i(m, i, t, quad_nodes); }, m.omega, grid_points);
      if (e.min_value < worst) {
        worst = e.min_value;
        h3.worst_t = m.omega * e.argmin / grid_points;
        h3.note = "equation " + std::to_string(i + 1);
      }
    }
    h3.margin = worst;
    h3.status = worst > 1e-12 ? HypothesisStatus::Satisfied : HypothesisStatus::Failed;
  }

  // H4: built-in nonlinearities with positive c(t) satisfy the boundedness,
  // zero-at-origin and lower-envelope requirements analytically; the envelope
  // constant (worst-case c over the period) is recorded per equation.
  {
    HypothesisEntry& h4 = report.entries[4];
    h4.status = HypothesisStatus::Satisfied;
    double worst_c = std::numeric_limits<double>::infinity();
    report.envelope_constants.assign(m.n, 0.0);
    for (int i = 0; i < m.n; ++i) {
      for (const model::DelayTerm& term : m.equations[i].terms) {
        report.envelope_constants[i] =
            std::max(report.envelope_constants[i], term.nonlinearity.lower_envelope_scale);
        worst_c = std::min(worst_c, term.nonlinearity.c_min);
      }
    }
    h4.margin = std::isfinite(worst_c) ? worst_c : 0.0;
    h4.note = "analytic for built-in nonlinearities with positive c(t)";
  }

  // H5: v >> 0 with M(t) v >> 0.
  {
    HypothesisEntry& h5 = report.entries[5];
    const auto matrix_at = [&](double t) {
      return model::community_matrices(m, t, quad_nodes).m;
    };
    const linalg::FeasibilityResult r =
        linalg::find_positive_vector(matrix_at, m.omega, grid_points);
    report.h5_margin_times = r.margin_times;
    report.h5_margin_profile = r.margin_profile;
    if (r.found) {
      h5.status = HypothesisStatus::Satisfied;
      h5.margin = r.margin;
      h5.worst_t = r.worst_time;
      report.witness_v = r.witness;
    } else {
      h5.status = HypothesisStatus::Failed;
      h5.margin = r.lp_delta;
      h5.worst_t = r.worst_time;
    }
  }

  return report;
}

double verify_h5_witness(const model::SystemModel& m, const Eigen::VectorXd& v, int grid_points,
                         int quad_nodes) {
  if (v.size() != m.n) throw Error("verify_h5_witness: witness size mismatch");
  const int fine = grid_points * 4;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < fine; ++k) {
    const double t = m.omega * k / fine;
    worst = std::min(worst, (model::community_matrices(m, t, quad_nodes).m * v).minCoeff());
  }
  return worst;
}

ScalarExcessBirth check_scalar_excess_birth(const model::SystemModel& m, int grid_points,
                                            int quad_nodes) {
  if (m.n != 1) throw Error("check_scalar_excess_birth: model must be scalar");
  ScalarExcessBirth out;
  const GridExtrema e = scan_grid(
      [&](double t) { return model::beta_i(m, 0, t, quad_nodes) - m.equations[0].d(t); },
      m.omega, grid_points);
  out.margin = e.min_value;
  out.worst_t = m.omega * e.argmin / grid_points;
  out.holds = e.min_value > 0.0;
  return out;
}

PlanarCriterion check_planar_criterion(const model::SystemModel& m, int grid_points,
                                       int quad_nodes) {
  if (m.n != 2) throw Error("check_planar_criterion: model must be planar");
  PlanarCriterion out;
  const model::PeriodicExpr* a1 = m.off_diagonal(0, 1);
  const model::PeriodicExpr* a2 = m.off_diagonal(1, 0);
  if (!a1 || !a2 || m.equations[0].off_diagonal.size() != 1 ||
      m.equations[1].off_diagonal.size() != 1)
    throw Error("check_planar_criterion: expects one dispersal coefficient per equation");

  // (i) min d1/a1 > max a2/d2, undefined when a1 vanishes.
  const GridExtrema a1_scan = scan_grid([&](double t) { return (*a1)(t); }, m.omega, grid_points);
  if (a1_scan.min_value <= 0.0) {
    out.ratio_checkable = false;
    out.note = "a1 vanishes on the grid; falling back to the H2 feasibility search";
    const linalg::FeasibilityResult h2 = linalg::find_positive_vector(
        [&](double t) { return model::d_minus_a(m, t); }, m.omega, grid_points);
    out.ratio_condition = h2.found;
  } else {
    const GridExtrema lhs = scan_grid(
        [&](double t) { return m.equations[0].d(t) / (*a1)(t); }, m.omega, grid_points);
    const GridExtrema rhs = scan_grid(
        [&](double t) { return (*a2)(t) / m.equations[1].d(t); }, m.omega, grid_points);
    out.ratio_min_d1_over_a1 = lhs.min_value;
    out.ratio_max_a2_over_d2 = rhs.max_value;
    out.ratio_condition = lhs.min_value > rhs.max_value;
  }

  // (ii) is the community-matrix feasibility condition for n = 2.
  const linalg::FeasibilityResult vec = linalg::find_positive_vector(
      [&](double t) { return model::community_matrices(m, t, quad_nodes).m; }, m.omega,
      grid_points);
  out.vector_condition = vec.found;
  if (vec.found) out.witness = vec.witness;
  out.holds = out.ratio_condition && out.vector_condition;
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_alpha_gamma(const model::SystemModel& m,
                                                                const Eigen::VectorXd& v,
                                                                int grid_points,
                                                                int quad_nodes) {
  if (v.size() != m.n) throw Error("compute_alpha_gamma: vector size mismatch");
  if (!(v.minCoeff() > 0.0)) throw Error("compute_alpha_gamma: vector must be positive");
  Eigen::VectorXd alpha(m.n), gamma(m.n);
  const double h = m.omega / grid_points;
  for (int i = 0; i < m.n; ++i) {
    const auto denominator = [&](double t) {
      double den = m.equations[i].d(t) * v(i);
      for (const auto& [j, a] : m.equations[i].off_diagonal) den -= a(t) * v(j);
      return den;
    };
    const auto ratio = [&](double t) {
      const double den = denominator(t);
      if (!(den > 0.0))
        throw SolverError("compute_alpha_gamma: nonpositive denominator at t = " +
                          std::to_string(t) + " in equation " + std::to_string(i + 1));
      return model::beta_i(m, i, t, quad_nodes) * v(i) / den;
    };
    const GridExtrema e = scan_grid(ratio, m.omega, grid_points);
    const double t_min = m.omega * e.argmin / grid_points;
    const double t_max = m.omega * e.argmax / grid_points;
    alpha(i) = golden_extremum(ratio, t_min - h, t_min + h, /*maximize=*/false, 1e-10);
    gamma(i) = golden_extremum(ratio, t_max - h, t_max + h, /*maximize=*/true, 1e-10);
    alpha(i) = std::min(alpha(i), e.min_value);
    gamma(i) = std::max(gamma(i), e.max_value);
  }
  return {alpha, gamma};
}

AttractivityReport check_attractivity(const model::SystemModel& m, const Eigen::VectorXd& v,
                                      int grid_points, int quad_nodes) {
  AttractivityReport report;
  report.v = v;
  for (const model::Equation& eq : m.equations)
    for (const model::DelayTerm& term : eq.terms)
      if (term.nonlinearity.type != model::NonlinearityType::Ricker)
        throw Error("check_attractivity: requires Ricker nonlinearities");

  try {
    auto [alpha, gamma] = compute_alpha_gamma(m, v, grid_points, quad_nodes);
    report.alpha_i = alpha;
    report.gamma_i = gamma;
    report.ratios_defined = true;
  } catch (const SolverError& e) {
    report.ratios_defined = false;
    report.note = e.what();
  }

  double c0 = std::numeric_limits<double>::infinity();
  double c0_sup = 0.0;
  for (int i = 0; i < m.n; ++i) {
    double c_minus = std::numeric_limits<double>::infinity();
    double c_plus = 0.0;
    for (const model::DelayTerm& term : m.equations[i].terms) {
      c_minus = std::min(c_minus, term.nonlinearity.c_min);
      c_plus = std::max(c_plus, term.nonlinearity.lower_envelope_scale);
    }
    if (!m.equations[i].terms.empty()) {
      c0 = std::min(c0, v(i) * c_minus);
      c0_sup = std::max(c0_sup, v(i) * c_plus);
    }
  }
  report.c0 = std::isfinite(c0) ? c0 : 0.0;
  report.c0_sup = c0_sup;
  report.threshold = c0_sup > 0.0 ? std::exp(2.0 * report.c0 / c0_sup) : 0.0;

  // Point delays, constant, integer multiples of a common coefficient period.
  bool all_discrete_constant = true;
  std::vector<double> delays;
  int max_terms_per_equation = 0;
  for (const model::Equation& eq : m.equations) {
    max_terms_per_equation = std::max(max_terms_per_equation, static_cast<int>(eq.terms.size()));
    for (const model::DelayTerm& term : eq.terms) {
      double tau = 0.0;
      if (term.kernel.type != model::KernelType::Discrete ||
          !expr_constant_on_grid(term.kernel.tau, m.omega, &tau)) {
        all_discrete_constant = false;
      }
      delays.push_back(tau);
    }
  }
  report.extended_multi_delay = max_terms_per_equation > 1;
  report.delay_multiples.assign(delays.size(), 0);

  if (all_discrete_constant && !delays.empty()) {
    if (m.autonomous) {
      report.autonomous = true;
      report.delays_are_multiples = true;
      report.base_period = m.omega;
      for (std::size_t k = 0; k < delays.size(); ++k) {
        const int mult = static_cast<int>(std::llround(delays[k] / m.omega));
        if (mult >= 1 && std::abs(delays[k] - mult * m.omega) <= 1e-9)
          report.delay_multiples[k] = mult;
      }
    } else {
      for (int r = 1; r <= 16 && !report.delays_are_multiples; ++r) {
        const double base = m.omega / r;
        bool delays_fit = true;
        std::vector<int> multiples(delays.size(), 0);
        for (std::size_t k = 0; k < delays.size(); ++k) {
          const long long mult = std::llround(delays[k] / base);
          if (mult < 1 || mult > 100 || std::abs(delays[k] - mult * base) > 1e-9) {
            delays_fit = false;
            break;
          }
          multiples[k] = static_cast<int>(mult);
        }
        if (!delays_fit) continue;
        if (r > 1) {
          bool coefficients_fit = true;
          model::for_each_coefficient(
              m, [&](const std::string&, const model::PeriodicExpr& f) {
                if (!coefficients_fit) return;
                if (!expr::check_periodicity(*f.ast(), base, 512).periodic)
                  coefficients_fit = false;
              });
          if (!coefficients_fit) continue;
        }
        report.delays_are_multiples = true;
        report.base_period = base;
        report.delay_multiples = multiples;
        if (r > 1)
          report.note = "delays are multiples of the reduced coefficient period omega/" +
                        std::to_string(r);
      }
    }
  } else if (!all_discrete_constant) {
    report.note = "delays must be constant point delays for the attractivity criterion";
  }

  report.condition_met = report.ratios_defined && report.alpha_i.size() > 0 &&
                         report.alpha_i.minCoeff() > 1.0 &&
                         report.gamma_i.maxCoeff() < report.threshold &&
                         report.delays_are_multiples;
  return report;
}

double delta_of_x(double x, double m, double y_max) {
  if (!(x > 0.0 && x < 2.0)) throw Error("delta_of_x: x must lie in (0, 2)");
  if (!(m > 0.0 && m < 1.0)) throw Error("delta_of_x: m must lie in (0, 1)");
  if (y_max <= m) throw Error("delta_of_x: y_max must exceed m");

  const double hx = x * std::exp(-x);
  const auto g_abs = [&](double y) {
    const double gap = y - x;
    if (std::abs(gap) < 1e-7 * (1.0 + std::abs(x))) {
      // removable point: G_x(x) = h'(x), expanded to first order
      const double d1 = (1.0 - x) * std::exp(-x);
      const double d2 = (x - 2.0) * std::exp(-x);
      return std::abs(d1 + 0.5 * d2 * gap);
    }
    return std::abs((y * std::exp(-y) - hx) / gap);
  };

  const int points = 4096;
  double best = 0.0;
  int best_k = 0;
  for (int k = 0; k <= points; ++k) {
    const double y = m + (y_max - m) * k / points;
    const double v = g_abs(y);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  const double h = (y_max - m) / points;
  const double y_best = m + h * best_k;
  const double lo = std::max(m, y_best - h);
  const double hi = std::min(y_max, y_best + h);
  return golden_extremum(g_abs, lo, hi, /*maximize=*/true, 1e-12);
}

PermanenceEstimate estimate_permanence(const model::SystemModel& m, int trials,
                                       int horizon_periods, int tail_periods,
                                       std::uint64_t seed, const dde::SolverConfig& config) {
  config.validate();
  if (trials < 1 || horizon_periods < 2 || tail_periods < 1 || tail_periods >= horizon_periods)
    throw Error("estimate_permanence: invalid trial/horizon parameters");
  PermanenceEstimate estimate;
  estimate.trials = trials;
  estimate.horizon_periods = horizon_periods;
  estimate.tail_periods = tail_periods;
  estimate.seed = seed;

  // Pre-drawn initial values keep the result independent of the thread count.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> initials(trials, std::vector<double>(m.n));
  for (int trial = 0; trial < trials; ++trial)
    for (int i = 0; i < m.n; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
      initials[static_cast<std::size_t>(trial)][static_cast<std::size_t>(i)] =
          std::pow(10.0, -3.0 + 5.0 * u);
    }

  const double t_end = horizon_periods * m.omega;
  const double tail_begin = (horizon_periods - tail_periods) * m.omega;
  std::vector<double> trial_min(trials, std::numeric_limits<double>::infinity());
  std::vector<double> trial_max(trials, -std::numeric_limits<double>::infinity());
  std::vector<std::string> failures(trials);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int trial = 0; trial < trials; ++trial) {
    try {
      const double span = std::max(m.tau_max, m.omega / config.steps_per_period);
      const dde::HistoryFunction history =
          dde::HistoryFunction::constant(m.n, initials[trial], -span - 1e-9, 0.0);
      const dde::Trajectory trajectory = dde::integrate(m, history, t_end, config);
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < trajectory.history.knots(); ++k) {
        if (trajectory.history.knot_time(k) < tail_begin) continue;
        for (int i = 0; i < m.n; ++i) {
          const double value = trajectory.history.knot_value(k, i);
          lo = std::min(lo, value);
          hi = std::max(hi, value);
        }
      }
      trial_min[trial] = lo;
      trial_max[trial] = hi;
    } catch (const Error& e) {
      failures[trial] = e.what();
    }
  }

  for (int trial = 0; trial < trials; ++trial)
    if (!failures[trial].empty())
      throw SolverError("estimate_permanence: trial " + std::to_string(trial + 1) +
                        " failed: " + failures[trial]);

  estimate.m_emp = *std::min_element(trial_min.begin(), trial_min.end());
  estimate.l_emp = *std::max_element(trial_max.begin(), trial_max.end());
  estimate.all_positive = estimate.m_emp > 0.0;
  return estimate;
}

double convergence_experiment(const model::SystemModel& m, const dde::HistoryFunction& phi_a,
                              const dde::HistoryFunction& phi_b, int horizon_periods,
                              const dde::SolverConfig& config) {
  config.validate();
  if (horizon_periods < 1) throw Error("convergence_experiment: horizon must be >= 1 period");
  const double t_end = horizon_periods * m.omega;
  dde::Trajectory trajectories[2];
  std::string failures[2];
  const dde::HistoryFunction* inits[2] = {&phi_a, &phi_b};

#ifdef _OPENMP
#pragma omp parallel for num_threads(2)
#endif
  for (int k = 0; k < 2; ++k) {
    try {
      trajectories[k] = dde::integrate(m, *inits[k], t_end, config);
    } catch (const Error& e) {
      failures[k] = e.what();
    }
  }
  for (int k = 0; k < 2; ++k)
    if (!failures[k].empty()) throw SolverError("convergence_experiment: " + failures[k]);

  const double h = m.omega / config.steps_per_period;
  double worst = 0.0;
  for (int k = 0; k <= config.steps_per_period; ++k) {
    const double t = std::min(t_end, t_end - m.omega + k * h);
    const std::vector<double> xa = trajectories[0].history.eval(t);
    const std::vector<double> xb = trajectories[1].history.eval(t);
    for (int i = 0; i < m.n; ++i) worst = std::max(worst, std::abs(xa[i] - xb[i]));
  }
  return worst;
}

}  // namespace perisolve::analysis
