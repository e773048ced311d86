// perisolve: periodic delayed patch-population systems -- hypothesis checks,
// periodic-solution solvers, attractivity criteria, and simulation experiments.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "perisolve/analysis.hpp"
#include "perisolve/errors.hpp"
#include "perisolve/integrator.hpp"
#include "perisolve/linalg.hpp"
#include "perisolve/model.hpp"
#include "perisolve/periodic.hpp"
#include "perisolve/report.hpp"
#include "perisolve/version.hpp"

namespace {

using perisolve::report::Json;
namespace fs = std::filesystem;

struct GlobalOptions {
  int grid = 256;
  int quad_nodes = 33;
  std::optional<double> tol;
  std::uint64_t seed = 12345;
  std::string out;
  std::string format = "json";
  int jobs = 0;
};

std::string resolve_model_path(const std::string& given) {
  if (fs::exists(given)) return given;
  if (const char* env = std::getenv("PERISOLVE_FIXTURES")) {
    const fs::path candidate = fs::path(env) / given;
    if (fs::exists(candidate)) return candidate.string();
  }
  const fs::path local = fs::path("fixtures") / given;
  if (fs::exists(local)) return local.string();
#ifdef PERISOLVE_DEFAULT_FIXTURE_DIR
  const fs::path built_in = fs::path(PERISOLVE_DEFAULT_FIXTURE_DIR) / given;
  if (fs::exists(built_in)) return built_in.string();
#endif
  throw perisolve::ModelError("cannot find model file: " + given);
}

Json make_manifest(const std::string& command, const std::string& model_path,
                   const GlobalOptions& opts, const Json& extra = Json::object()) {
  Json manifest;
  manifest["command"] = command;
  manifest["model"] = model_path;
  Json config;
  config["grid"] = opts.grid;
  config["quad_nodes"] = opts.quad_nodes;
  if (opts.tol) config["tol"] = *opts.tol;
  config["seed"] = opts.seed;
  config["format"] = opts.format;
  if (opts.jobs > 0) config["jobs"] = opts.jobs;
  for (const auto& [key, value] : extra.items()) config[key] = value;
  manifest["config"] = std::move(config);
  manifest["version"] = perisolve::kVersion;
  manifest["out"] = opts.out;
  return manifest;
}

void emit(const Json& envelope, const GlobalOptions& opts) {
  std::ostringstream body;
  if (opts.format == "csv")
    perisolve::report::write_csv(body, envelope);
  else
    body << envelope.dump(2) << "\n";
  std::cout << body.str();
  if (!opts.out.empty()) {
    std::ofstream file(opts.out);
    if (!file) throw perisolve::Error("cannot open output file: " + opts.out);
    file << body.str();
  }
}

Json finalize(const std::string& command, const std::string& model_path,
              const GlobalOptions& opts, Json report,
              std::chrono::steady_clock::time_point started,
              const Json& manifest_extra = Json::object()) {
  Json envelope;
  envelope["manifest"] = make_manifest(command, model_path, opts, manifest_extra);
  envelope["report"] = std::move(report);
  envelope["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return envelope;
}

perisolve::dde::SolverConfig solver_config(const GlobalOptions& opts) {
  perisolve::dde::SolverConfig config;
  config.steps_per_period = opts.grid;
  config.quad_nodes = opts.quad_nodes;
  config.validate();
  return config;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw perisolve::Error("empty number list: '" + text + "'");
  return out;
}

bool all_ricker(const perisolve::model::SystemModel& m) {
  for (const auto& eq : m.equations)
    for (const auto& term : eq.terms)
      if (term.nonlinearity.type != perisolve::model::NonlinearityType::Ricker) return false;
  return true;
}

perisolve::dde::HistoryFunction history_from_spec(const perisolve::model::SystemModel& m,
                                                  const std::string& spec, double step) {
  using perisolve::dde::HistoryFunction;
  const double span = std::max(m.tau_max + 2.0 * step, m.omega / 2.0);
  if (spec.rfind("const:", 0) == 0) {
    std::vector<double> values = parse_number_list(spec.substr(6));
    if (values.size() == 1) values.assign(static_cast<std::size_t>(m.n), values[0]);
    if (static_cast<int>(values.size()) != m.n)
      throw perisolve::Error("history const: expected 1 or " + std::to_string(m.n) + " values");
    return HistoryFunction::constant(m.n, values, -span, 0.0);
  }
  if (spec.rfind("csv:", 0) == 0) {
    const std::string path = spec.substr(4);
    std::ifstream in(path);
    if (!in) throw perisolve::Error("cannot open history file: " + path);
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == 't' || line[0] == '#') continue;
      std::stringstream row(line);
      std::string cell;
      std::vector<double> values;
      while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
      if (static_cast<int>(values.size()) != m.n + 1)
        throw perisolve::Error("history csv: expected t and " + std::to_string(m.n) +
                               " columns");
      times.push_back(values[0]);
      rows.emplace_back(values.begin() + 1, values.end());
    }
    if (times.size() < 2) throw perisolve::Error("history csv: need at least two rows");
    HistoryFunction history(m.n);
    std::vector<double> deriv(static_cast<std::size_t>(m.n));
    for (std::size_t k = 0; k < times.size(); ++k) {
      const std::size_t prev = k == 0 ? 0 : k - 1;
      const std::size_t next = k + 1 == times.size() ? k : k + 1;
      for (int i = 0; i < m.n; ++i)
        deriv[static_cast<std::size_t>(i)] =
            (rows[next][static_cast<std::size_t>(i)] -
             rows[prev][static_cast<std::size_t>(i)]) /
            (times[next] - times[prev]);
      history.append(times[k], rows[k], deriv);
    }
    return history;
  }
  throw perisolve::Error("history must be const:<v> or csv:<path>");
}

int run_check(const std::string& model_arg, const GlobalOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  const std::string path = resolve_model_path(model_arg);
  const auto m = perisolve::model::load_model_file(path);
  const auto hypotheses = perisolve::analysis::check_hypotheses(m, opts.grid, opts.quad_nodes);

  Json report;
  report["hypotheses"] = perisolve::report::to_json(hypotheses);
  if (m.n == 1)
    report["scalar_excess_birth"] = perisolve::report::to_json(
        perisolve::analysis::check_scalar_excess_birth(m, opts.grid, opts.quad_nodes));
  if (m.n == 2 && m.equations[0].off_diagonal.size() == 1 &&
      m.equations[1].off_diagonal.size() == 1)
    report["planar_criterion"] = perisolve::report::to_json(
        perisolve::analysis::check_planar_criterion(m, opts.grid, opts.quad_nodes));

  emit(finalize("check", path, opts, std::move(report), started), opts);
  return hypotheses.all_satisfied() ? 0 : 2;
}

int run_periodic(const std::string& model_arg, const GlobalOptions& opts,
                 const std::string& method, int max_iterations, double damping) {
  const auto started = std::chrono::steady_clock::now();
  const std::string path = resolve_model_path(model_arg);
  const auto m = perisolve::model::load_model_file(path);
  const auto config = solver_config(opts);

  Json report;
  report["method"] = method;
  bool certified = false;
  std::optional<perisolve::periodic::PeriodicProfile> fixed_profile, poincare_profile;

  if (method == "fixed-point" || method == "both") {
    const auto cache = perisolve::linalg::fundamental_matrix(m, config);
    perisolve::periodic::FixedPointOptions fp_options;
    fp_options.max_iterations = max_iterations;
    fp_options.damping = damping;
    if (opts.tol) fp_options.tolerance = *opts.tol;
    const auto init = perisolve::periodic::default_initial_profile(m, config.steps_per_period);
    auto [profile, diag] =
        perisolve::periodic::find_periodic_fixed_point(m, cache, init, fp_options, config);
    report["fixed_point"] = perisolve::report::to_json(diag);
    report["fixed_point"]["min_value"] = profile.min_value();
    report["fixed_point"]["max_value"] = profile.max_value();
    if (diag.converged && diag.dde_residual <= 1e-5 && profile.min_value() > 1e-6)
      certified = true;
    else if (diag.converged && profile.min_value() <= 1e-6)
      report["fixed_point"]["note"] =
          "profile collapsed toward zero; not a positive periodic solution";
    else if (perisolve::analysis::check_hypotheses(m, opts.grid, opts.quad_nodes)
                 .all_satisfied())
      report["fixed_point"]["existence"] =
          "certified by hypotheses H0-H5; profile not located";
    fixed_profile = std::move(profile);
  }
  if (method == "poincare" || method == "both") {
    perisolve::periodic::PoincareOptions po_options;
    if (opts.tol) po_options.tolerance = *opts.tol;
    const auto init_profile =
        perisolve::periodic::default_initial_profile(m, config.steps_per_period);
    std::vector<double> init_vec(static_cast<std::size_t>(m.n));
    for (int i = 0; i < m.n; ++i) init_vec[static_cast<std::size_t>(i)] = init_profile.value(0, i);
    const double span =
        std::max(m.tau_max + 2.0 * m.omega / config.steps_per_period, m.omega / 2.0);
    const auto history = perisolve::dde::HistoryFunction::constant(m.n, init_vec, -span, 0.0);
    auto [profile, diag] =
        perisolve::periodic::find_periodic_poincare(m, history, config, po_options);
    report["poincare"] = perisolve::report::to_json(diag);
    report["poincare"]["min_value"] = profile.min_value();
    report["poincare"]["max_value"] = profile.max_value();
    if (diag.converged && profile.min_value() > 1e-6) {
      const double residual = perisolve::periodic::dde_residual(m, profile, config);
      report["poincare"]["dde_residual"] = residual;
      if (residual <= 1e-5) certified = true;
    } else if (diag.converged) {
      report["poincare"]["note"] =
          "profile collapsed toward zero; not a positive periodic solution";
    }
    poincare_profile = std::move(profile);
  }
  if (fixed_profile && poincare_profile)
    report["cross_method_sup_difference"] = fixed_profile->sup_distance(*poincare_profile);

  const auto& exported = fixed_profile ? *fixed_profile : *poincare_profile;
  if (exported.min_value() > 0.0 && all_ricker(m)) {
    try {
      report["ricker_profile_bound"] = perisolve::report::to_json(
          perisolve::periodic::ricker_profile_bound(m, Eigen::VectorXd::Ones(m.n), opts.grid,
                                                    opts.quad_nodes));
    } catch (const perisolve::Error&) {
      // bound hypotheses fail for this model; omitted
    }
  }

  if (!opts.out.empty()) {
    std::ofstream csv(opts.out);
    if (!csv) throw perisolve::Error("cannot open output file: " + opts.out);
    perisolve::report::write_profile_csv(csv, exported);
  }
  Json manifest_extra;
  manifest_extra["method"] = method;
  const Json envelope =
      finalize("periodic", path, opts, std::move(report), started, manifest_extra);
  std::cout << envelope.dump(2) << "\n";
  return certified ? 0 : 3;
}

int run_simulate(const std::string& model_arg, const GlobalOptions& opts,
                 const std::string& history_spec, double periods, int sample_per_period) {
  const std::string path = resolve_model_path(model_arg);
  const auto m = perisolve::model::load_model_file(path);
  const auto config = solver_config(opts);
  const auto history = history_from_spec(m, history_spec, m.omega / config.steps_per_period);
  const auto trajectory = perisolve::dde::integrate(m, history, periods * m.omega, config);
  for (const std::string& warning : trajectory.warnings)
    std::cerr << "warning: " << warning << "\n";

  std::ostringstream body;
  if (sample_per_period > 0)
    perisolve::report::write_trajectory_csv_sampled(body, trajectory, m.omega,
                                                    sample_per_period);
  else
    perisolve::report::write_trajectory_csv(body, trajectory);
  if (!opts.out.empty()) {
    std::ofstream file(opts.out);
    if (!file) throw perisolve::Error("cannot open output file: " + opts.out);
    file << body.str();
  } else {
    std::cout << body.str();
  }
  return 0;
}

int run_attract(const std::string& model_arg, const GlobalOptions& opts,
                const std::string& v_spec, int confirm_periods) {
  const auto started = std::chrono::steady_clock::now();
  const std::string path = resolve_model_path(model_arg);
  const auto m = perisolve::model::load_model_file(path);
  if (!all_ricker(m))
    throw perisolve::Error("attract requires a Ricker (Nicholson) model");

  Eigen::VectorXd v;
  std::string v_source = v_spec;
  if (v_spec == "auto") {
    const auto hypotheses = perisolve::analysis::check_hypotheses(m, opts.grid, opts.quad_nodes);
    if (hypotheses.witness_v) {
      v = *hypotheses.witness_v;
      v_source = "h5-witness";
    } else {
      v = Eigen::VectorXd::Ones(m.n);
      v_source = "ones (no H5 witness found)";
    }
  } else {
    const std::vector<double> values = parse_number_list(v_spec);
    if (static_cast<int>(values.size()) != m.n)
      throw perisolve::Error("attract --v: expected " + std::to_string(m.n) + " entries");
    v = Eigen::Map<const Eigen::VectorXd>(values.data(), m.n);
    if (!(v.minCoeff() > 0.0)) throw perisolve::Error("attract --v: entries must be positive");
  }

  const auto attract = perisolve::analysis::check_attractivity(m, v, opts.grid, opts.quad_nodes);
  Json report;
  report["attractivity"] = perisolve::report::to_json(attract);
  report["attractivity"]["v_source"] = v_source;

  if (confirm_periods > 0) {
    const auto config = solver_config(opts);
    const double step = m.omega / config.steps_per_period;
    const auto low = history_from_spec(m, "const:0.5", step);
    const auto high = history_from_spec(m, "const:5", step);
    Json confirmation;
    confirmation["periods"] = confirm_periods;
    confirmation["tail_sup_difference"] =
        perisolve::analysis::convergence_experiment(m, low, high, confirm_periods, config);
    report["confirmation"] = std::move(confirmation);
  }

  Json manifest_extra;
  manifest_extra["v"] = v_spec;
  manifest_extra["confirm_periods"] = confirm_periods;
  emit(finalize("attract", path, opts, std::move(report), started, manifest_extra), opts);
  return attract.condition_met ? 0 : 2;
}

int run_delta(const GlobalOptions& opts, const std::string& x_list, double m_low) {
  const std::vector<double> xs = parse_number_list(x_list);
  std::ostringstream body;
  body.precision(17);
  body << "x,delta,exp_minus_x\n";
  bool all_below = true;
  for (double x : xs) {
    const double delta = perisolve::analysis::delta_of_x(x, m_low);  // throws outside (0,2)
    const double bound = std::exp(-x);
    all_below = all_below && delta < bound;
    body << x << "," << delta << "," << bound << "\n";
  }
  std::cout << body.str();
  if (!opts.out.empty()) {
    std::ofstream file(opts.out);
    if (!file) throw perisolve::Error("cannot open output file: " + opts.out);
    file << body.str();
  }
  return all_below ? 0 : 2;
}

int run_equilibrium(const std::string& model_arg, const GlobalOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  const std::string path = resolve_model_path(model_arg);
  const auto m = perisolve::model::load_model_file(path);
  const auto result = perisolve::periodic::find_equilibrium(m, opts.quad_nodes);
  Json report;
  report["x"] = perisolve::report::to_json(result.x);
  report["iterations"] = result.iterations;
  report["residual"] = result.residual;
  report["loss_matrix_nonsingular_m"] = result.loss_matrix_nonsingular_m;
  report["community_condition"] = result.community_condition;
  emit(finalize("equilibrium", path, opts, std::move(report), started), opts);
  return 0;
}

std::vector<double> parse_value_range(const std::string& spec) {
  // start:stop:count or a comma list
  if (std::count(spec.begin(), spec.end(), ':') == 2) {
    const auto first = spec.find(':');
    const auto second = spec.find(':', first + 1);
    const double start = std::stod(spec.substr(0, first));
    const double stop = std::stod(spec.substr(first + 1, second - first - 1));
    const int count = std::stoi(spec.substr(second + 1));
    if (count < 2) throw perisolve::Error("sweep --values: count must be >= 2");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
      out[static_cast<std::size_t>(k)] = start + (stop - start) * k / (count - 1);
    return out;
  }
  return parse_number_list(spec);
}

Json substitute_parameter(const Json& node, const std::regex& pattern,
                          const std::string& replacement) {
  if (node.is_string())
    return std::regex_replace(node.get<std::string>(), pattern, replacement);
  if (node.is_object()) {
    Json out = Json::object();
    for (const auto& [key, value] : node.items())
      out[key] = substitute_parameter(value, pattern, replacement);
    return out;
  }
  if (node.is_array()) {
    Json out = Json::array();
    for (const auto& value : node)
      out.push_back(substitute_parameter(value, pattern, replacement));
    return out;
  }
  return node;
}

int run_sweep(const std::string& model_arg, const GlobalOptions& opts,
              const std::string& parameter, const std::string& values_spec) {
  const auto started = std::chrono::steady_clock::now();
  const std::string path = resolve_model_path(model_arg);
  std::ifstream in(path);
  if (!in) throw perisolve::ModelError("cannot open model file: " + path);
  Json document;
  in >> document;

  const std::vector<double> values = parse_value_range(values_spec);
  const std::regex pattern("\\b" + parameter + "\\b");
  const int row_count = static_cast<int>(values.size());
  std::vector<Json> rows(values.size());
  std::vector<std::string> errors(values.size());

#ifdef _OPENMP
  const int threads =
      std::max(1, opts.jobs > 0 ? opts.jobs : omp_get_max_threads());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (int k = 0; k < row_count; ++k) {
    try {
      char buffer[64];
      std::snprintf(buffer, sizeof buffer, "(%.17g)", values[k]);
      const Json substituted = substitute_parameter(document, pattern, buffer);
      const auto m =
          perisolve::model::load_model(nlohmann::json::parse(substituted.dump()), path);
      const auto hypotheses =
          perisolve::analysis::check_hypotheses(m, opts.grid, opts.quad_nodes);
      Json row;
      row["value"] = values[k];
      row["all_satisfied"] = hypotheses.all_satisfied();
      for (int h = 0; h < 6; ++h)
        row["H" + std::to_string(h)] = perisolve::analysis::to_string(hypotheses.h(h).status);
      row["h5_margin"] = hypotheses.h(5).margin;
      if (all_ricker(m)) {
        const Eigen::VectorXd v =
            hypotheses.witness_v ? *hypotheses.witness_v : Eigen::VectorXd::Ones(m.n);
        try {
          const auto attract =
              perisolve::analysis::check_attractivity(m, v, opts.grid, opts.quad_nodes);
          row["condition_met"] = attract.condition_met;
          if (attract.ratios_defined) {
            row["alpha_min"] = attract.alpha_i.minCoeff();
            row["gamma_max"] = attract.gamma_i.maxCoeff();
            row["threshold"] = attract.threshold;
          }
        } catch (const perisolve::Error& e) {
          row["condition_met"] = false;
          row["attract_error"] = e.what();
        }
      }
      rows[k] = std::move(row);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }

  Json report;
  report["parameter"] = parameter;
  Json row_array = Json::array();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!errors[k].empty()) {
      Json row;
      row["value"] = values[k];
      row["error"] = errors[k];
      row_array.push_back(std::move(row));
    } else {
      row_array.push_back(std::move(rows[k]));
    }
  }
  report["rows"] = std::move(row_array);

  Json manifest_extra;
  manifest_extra["param"] = parameter;
  manifest_extra["values"] = values_spec;
  emit(finalize("sweep", path, opts, std::move(report), started, manifest_extra), opts);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"periodic delayed patch-population systems: hypothesis checks, periodic "
               "solutions, attractivity criteria, simulations"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_version_flag("--version", perisolve::kVersion);

  GlobalOptions opts;
  app.add_option("--grid", opts.grid, "grid points per period")->capture_default_str();
  app.add_option("--quad", opts.quad_nodes, "quadrature nodes for density kernels")
      ->capture_default_str();
  double tol_value = 0.0;
  auto* tol_option = app.add_option("--tol", tol_value, "solver tolerance override");
  app.add_option("--seed", opts.seed, "seed for randomized experiments")->capture_default_str();
  app.add_option("--out", opts.out, "write the main artifact to this path");
  app.add_option("--format", opts.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--jobs", opts.jobs, "parallel workers for sweeps (0 = all cores)")
      ->capture_default_str();

  std::string model_arg;
  std::string method = "fixed-point";
  int max_iterations = 500;
  double damping = 1.0;
  auto* cmd_check = app.add_subcommand("check", "verify hypotheses H0-H5 and related criteria");
  cmd_check->add_option("model", model_arg, "model document (JSON)")->required();

  auto* cmd_periodic = app.add_subcommand("periodic", "compute a positive periodic solution");
  cmd_periodic->add_option("model", model_arg, "model document (JSON)")->required();
  cmd_periodic->add_option("--method", method, "fixed-point | poincare | both")
      ->check(CLI::IsMember({"fixed-point", "poincare", "both"}))
      ->capture_default_str();
  cmd_periodic->add_option("--maxiter", max_iterations, "iteration cap")->capture_default_str();
  cmd_periodic->add_option("--damping", damping, "initial mixing factor")->capture_default_str();

  std::string history_spec = "const:1";
  double periods = 10.0;
  int sample_per_period = 0;
  auto* cmd_simulate = app.add_subcommand("simulate", "integrate and export a trajectory CSV");
  cmd_simulate->add_option("model", model_arg, "model document (JSON)")->required();
  cmd_simulate->add_option("--history", history_spec, "const:<v[,v2,...]> or csv:<path>")
      ->capture_default_str();
  cmd_simulate->add_option("--periods", periods, "horizon in periods")->capture_default_str();
  cmd_simulate
      ->add_option("--sample", sample_per_period,
                   "resample at this many points per period (0 = raw knots)")
      ->capture_default_str();

  std::string v_spec = "auto";
  int confirm_periods = 0;
  auto* cmd_attract = app.add_subcommand("attract", "global-attractivity criterion");
  cmd_attract->add_option("model", model_arg, "model document (JSON)")->required();
  cmd_attract->add_option("--v", v_spec, "weight vector: auto or comma list")
      ->capture_default_str();
  cmd_attract
      ->add_option("--confirm-periods", confirm_periods,
                   "also run a two-trajectory convergence experiment")
      ->capture_default_str();

  std::string x_list;
  double m_low = 0.1;
  auto* cmd_delta = app.add_subcommand(
      "delta", "secant-slope bound delta(x) of the Ricker map against e^{-x}");
  cmd_delta->add_option("--x", x_list, "comma list of x values in (0,2)")->required();
  cmd_delta->add_option("--m", m_low, "lower end of the y range")->capture_default_str();

  auto* cmd_equilibrium =
      app.add_subcommand("equilibrium", "positive equilibrium of a constant-coefficient model");
  cmd_equilibrium->add_option("model", model_arg, "model document (JSON)")->required();

  std::string parameter, values_spec;
  auto* cmd_sweep =
      app.add_subcommand("sweep", "grid over a named scalar parameter in the expressions");
  cmd_sweep->add_option("model", model_arg, "model document (JSON)")->required();
  cmd_sweep->add_option("--param", parameter, "parameter identifier")->required();
  cmd_sweep->add_option("--values", values_spec, "start:stop:count or comma list")->required();

  CLI11_PARSE(app, argc, argv);
  if (tol_option->count() > 0) opts.tol = tol_value;

  try {
    if (cmd_check->parsed()) return run_check(model_arg, opts);
    if (cmd_periodic->parsed())
      return run_periodic(model_arg, opts, method, max_iterations, damping);
    if (cmd_simulate->parsed())
      return run_simulate(model_arg, opts, history_spec, periods, sample_per_period);
    if (cmd_attract->parsed()) return run_attract(model_arg, opts, v_spec, confirm_periods);
    if (cmd_delta->parsed()) return run_delta(opts, x_list, m_low);
    if (cmd_equilibrium->parsed()) return run_equilibrium(model_arg, opts);
    if (cmd_sweep->parsed()) return run_sweep(model_arg, opts, parameter, values_spec);
  } catch (const perisolve::PositivityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
