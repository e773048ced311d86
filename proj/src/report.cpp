#include "perisolve/report.hpp"

#include <cmath>
#include <iomanip>

namespace perisolve::report {

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const analysis::HypothesisEntry& entry) {
  Json out;
  out["status"] = analysis::to_string(entry.status);
  out["margin"] = entry.margin;
  out["worst_t"] = entry.worst_t;
  if (!entry.note.empty()) out["note"] = entry.note;
  return out;
}

Json to_json(const analysis::HypothesisReport& report) {
  Json out;
  for (int k = 0; k < 6; ++k) {
    Json entry = to_json(report.h(k));
    if (k == 2 && report.witness_u) entry["witness"] = to_json(*report.witness_u);
    if (k == 5 && report.witness_v) entry["witness"] = to_json(*report.witness_v);
    out["H" + std::to_string(k)] = std::move(entry);
  }
  out["all_satisfied"] = report.all_satisfied();
  out["grid_points"] = report.grid_points;
  out["omega"] = report.omega;
  if (!report.envelope_constants.empty()) out["envelope_constants"] = report.envelope_constants;
  Json profiles;
  profiles["h2_t"] = report.h2_margin_times;
  profiles["h2"] = report.h2_margin_profile;
  profiles["h5_t"] = report.h5_margin_times;
  profiles["h5"] = report.h5_margin_profile;
  out["margin_profiles"] = std::move(profiles);
  return out;
}

Json to_json(const analysis::ScalarExcessBirth& r) {
  Json out;
  out["holds"] = r.holds;
  out["margin"] = r.margin;
  out["worst_t"] = r.worst_t;
  return out;
}

Json to_json(const analysis::PlanarCriterion& r) {
  Json out;
  out["holds"] = r.holds;
  out["ratio_checkable"] = r.ratio_checkable;
  out["ratio_condition"] = r.ratio_condition;
  out["ratio_min_d1_over_a1"] = r.ratio_min_d1_over_a1;
  out["ratio_max_a2_over_d2"] = r.ratio_max_a2_over_d2;
  out["vector_condition"] = r.vector_condition;
  if (r.witness.size() > 0) out["witness"] = to_json(r.witness);
  if (!r.note.empty()) out["note"] = r.note;
  return out;
}

Json to_json(const analysis::AttractivityReport& r) {
  Json out;
  out["condition_met"] = r.condition_met;
  out["v"] = to_json(r.v);
  out["ratios_defined"] = r.ratios_defined;
  if (r.ratios_defined) {
    out["alpha_i"] = to_json(r.alpha_i);
    out["gamma_i"] = to_json(r.gamma_i);
  }
  out["c0"] = r.c0;
  out["c0_sup"] = r.c0_sup;
  out["threshold"] = r.threshold;
  out["delays_are_multiples"] = r.delays_are_multiples;
  out["delay_multiples"] = r.delay_multiples;
  out["base_period"] = r.base_period;
  out["autonomous"] = r.autonomous;
  out["extended_multi_delay"] = r.extended_multi_delay;
  if (!r.note.empty()) out["note"] = r.note;
  return out;
}

Json to_json(const analysis::PermanenceEstimate& r) {
  Json out;
  out["m_emp"] = r.m_emp;
  out["l_emp"] = r.l_emp;
  out["trials"] = r.trials;
  out["horizon_periods"] = r.horizon_periods;
  out["tail_periods"] = r.tail_periods;
  out["seed"] = r.seed;
  out["all_positive"] = r.all_positive;
  out["extinction_suspected"] = r.m_emp < 1e-6;
  return out;
}

Json to_json(const periodic::FixedPointDiagnostics& d) {
  Json out;
  out["converged"] = d.converged;
  out["iterations"] = d.iterations;
  out["final_delta"] = d.final_delta;
  out["operator_residual"] = d.operator_residual;
  out["dde_residual"] = d.dde_residual;
  out["damping_final"] = d.damping_final;
  if (!d.notes.empty()) out["notes"] = d.notes;
  return out;
}

Json to_json(const periodic::PoincareDiagnostics& d) {
  Json out;
  out["converged"] = d.converged;
  out["periods"] = d.periods;
  out["final_gap"] = d.final_gap;
  return out;
}

namespace {

void flatten(const Json& j, const std::string& path, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten(value, path.empty() ? key : path + "." + key, out);
  } else if (j.is_array()) {
    std::size_t index = 0;
    for (const auto& value : j) flatten(value, path + "[" + std::to_string(index++) + "]", out);
  } else {
    out << path << "," << j.dump() << "\n";
  }
}

}  // namespace

void write_csv(std::ostream& out, const Json& j) {
  out << "path,value\n";
  flatten(j, "", out);
}

namespace {

void write_row(std::ostream& out, double t, const std::vector<double>& x) {
  out << t;
  for (double v : x) out << "," << v;
  out << "\n";
}

void write_header(std::ostream& out, const char* name, int n) {
  out << "t";
  for (int i = 1; i <= n; ++i) out << "," << name << i;
  out << "\n";
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const dde::Trajectory& trajectory) {
  const auto& h = trajectory.history;
  out << std::setprecision(17);
  write_header(out, "x", h.components());
  std::vector<double> x(h.components());
  for (std::size_t k = 0; k < h.knots(); ++k) {
    for (int i = 0; i < h.components(); ++i) x[static_cast<std::size_t>(i)] = h.knot_value(k, i);
    write_row(out, h.knot_time(k), x);
  }
}

void write_trajectory_csv_sampled(std::ostream& out, const dde::Trajectory& trajectory,
                                  double omega, int samples_per_period) {
  const auto& h = trajectory.history;
  out << std::setprecision(17);
  write_header(out, "x", h.components());
  const double dt = omega / samples_per_period;
  for (double t = std::max(0.0, h.span_begin()); t <= h.span_end() + 1e-12; t += dt)
    write_row(out, t, h.eval(std::min(t, h.span_end())));
}

void write_profile_csv(std::ostream& out, const periodic::PeriodicProfile& profile) {
  out << std::setprecision(17);
  write_header(out, "phi", profile.components());
  std::vector<double> x(profile.components());
  for (int k = 0; k < profile.grid_size(); ++k) {
    for (int i = 0; i < profile.components(); ++i)
      x[static_cast<std::size_t>(i)] = profile.value(k, i);
    write_row(out, profile.grid_time(k), x);
  }
}

}  // namespace perisolve::report
