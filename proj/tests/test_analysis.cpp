#include <doctest.h>

#include <cmath>
#include <string>

#include "perisolve/analysis.hpp"
#include "perisolve/model.hpp"
#include "perisolve/periodic.hpp"

using namespace perisolve;
using namespace perisolve::analysis;
using nlohmann::json;

namespace {

const std::string fixture_dir = PERISOLVE_FIXTURE_DIR;

model::SystemModel fixture(const std::string& name) {
  return model::load_model_file(fixture_dir + "/" + name);
}

json scalar_doc(const char* d, const char* beta, const char* c, const char* tau,
                double omega) {
  return json{{"n", 1},
              {"omega", omega},
              {"equations",
               {{{"d", d},
                 {"terms",
                  {{{"beta", beta},
                    {"kernel", {{"type", "discrete"}, {"tau", tau}}},
                    {"nonlinearity", {{"type", "ricker"}, {"c", c}}}}}}}}}};
}

}  // namespace

TEST_CASE("hypothesis report for the planar Mackey-Glass fixture") {
  const auto m = fixture("example_3_1.json");
  const auto report = check_hypotheses(m);
  CHECK(report.h(0).status == HypothesisStatus::Satisfied);
  CHECK(report.h(1).status == HypothesisStatus::Satisfied);
  CHECK(report.h(2).status == HypothesisStatus::SatisfiedWeak);
  CHECK(report.h(3).status == HypothesisStatus::Satisfied);
  CHECK(report.h(4).status == HypothesisStatus::Satisfied);
  CHECK(report.h(5).status == HypothesisStatus::Satisfied);
  CHECK(report.all_satisfied());
  REQUIRE(report.witness_v.has_value());
  // the community-matrix condition accepts weights proportional to (1, 1)
  CHECK(verify_h5_witness(m, Eigen::VectorXd::Ones(2)) > 0.0);
  // witnesses re-verify on the 4x finer grid
  CHECK(verify_h5_witness(m, *report.witness_v) > 0.0);
  REQUIRE(report.witness_u.has_value());
  double h2_min = 1e300;
  for (double margin : report.h2_margin_profile) h2_min = std::min(h2_min, margin);
  CHECK(h2_min >= -1e-9);
}

TEST_CASE("hypothesis report for the distributed-delay fixture") {
  const auto m = fixture("example_3_2.json");
  const auto report = check_hypotheses(m);
  CHECK(report.all_satisfied());
  CHECK(report.h(2).status == HypothesisStatus::SatisfiedWeak);
  CHECK(report.h(5).status == HypothesisStatus::Satisfied);
  // weak H2 witness is close to the analytic direction (1, e)
  REQUIRE(report.witness_u.has_value());
  const Eigen::VectorXd& u = *report.witness_u;
  CHECK(u(1) / u(0) == doctest::Approx(M_E).epsilon(1e-6));
}

TEST_CASE("H2 fails when dispersal overwhelms the loss rates") {
  // (D - A)u >= 0 forces u1 >= 2 u2 and u2 >= 2 u1, so no positive u exists
  json doc = {{"n", 2},
              {"omega", 1.0},
              {"equations",
               {{{"d", "1"},
                 {"a", {{"2", "2"}}},
                 {"terms",
                  {{{"beta", "3"},
                    {"kernel", {{"type", "discrete"}, {"tau", "1"}}},
                    {"nonlinearity", {{"type", "ricker"}, {"c", "1"}}}}}}},
                {{"d", "1"},
                 {"a", {{"1", "2"}}},
                 {"terms",
                  {{{"beta", "3"},
                    {"kernel", {{"type", "discrete"}, {"tau", "1"}}},
                    {"nonlinearity", {{"type", "ricker"}, {"c", "1"}}}}}}}}}};
  const auto report = check_hypotheses(model::load_model(doc));
  CHECK(report.h(2).status == HypothesisStatus::Failed);
  CHECK(report.h(5).status == HypothesisStatus::Satisfied);  // independent of H2
  CHECK_FALSE(report.all_satisfied());
}

TEST_CASE("H5 fails when the birth coefficient stays below the loss rate") {
  const auto m = model::load_model(scalar_doc("1", "0.5", "1", "1", 1.0));
  const auto report = check_hypotheses(m);
  CHECK(report.h(5).status == HypothesisStatus::Failed);
  CHECK(report.any_failed());
  CHECK_FALSE(report.all_satisfied());
}

TEST_CASE("H5 implies feasibility of the H2 search on the worked fixtures") {
  for (const char* name : {"example_3_1.json", "example_3_2.json", "planar_1_9.json"}) {
    const auto report = check_hypotheses(fixture(name));
    CHECK_MESSAGE(report.h(5).status == HypothesisStatus::Satisfied, name);
    const bool h2_ok = report.h(2).status == HypothesisStatus::Satisfied ||
                       report.h(2).status == HypothesisStatus::SatisfiedWeak;
    CHECK_MESSAGE(h2_ok, name);
  }
}

TEST_CASE("scalar excess-birth criterion") {
  SUBCASE("constant surplus") {
    const auto r = check_scalar_excess_birth(model::load_model(scalar_doc("1", "exp(2)", "1", "1", 1.0)));
    CHECK(r.holds);
    CHECK(r.margin == doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-12));
  }
  SUBCASE("deficit at t = 0") {
    const auto r = check_scalar_excess_birth(
        model::load_model(scalar_doc("2", "1+sin(t)^2", "1", "pi", M_PI)));
    CHECK_FALSE(r.holds);
    CHECK(r.margin <= -1.0 + 1e-12);
  }
  SUBCASE("trigonometric loss rate") {
    const auto r = check_scalar_excess_birth(
        model::load_model(scalar_doc("1+cos(t)^2", "3", "1", "pi", M_PI)));
    CHECK(r.holds);
    CHECK(r.margin == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("planar criterion") {
  SUBCASE("the shipped planar fixture passes both parts") {
    const auto r = check_planar_criterion(fixture("planar_1_9.json"));
    CHECK(r.holds);
    CHECK(r.ratio_condition);
    CHECK(r.ratio_min_d1_over_a1 == doctest::Approx(4.0));
    CHECK(r.ratio_max_a2_over_d2 == doctest::Approx(0.25));
    CHECK(r.vector_condition);
  }
  SUBCASE("ratio condition violated by construction") {
    json doc = {{"n", 2},
                {"omega", 1.0},
                {"equations",
                 {{{"d", "1"},
                   {"a", {{"2", "2"}}},
                   {"terms",
                    {{{"beta", "3"},
                      {"kernel", {{"type", "discrete"}, {"tau", "1"}}},
                      {"nonlinearity", {{"type", "ricker"}, {"c", "1"}}}}}}},
                  {{"d", "1"},
                   {"a", {{"1", "2"}}},
                   {"terms",
                    {{{"beta", "3"},
                      {"kernel", {{"type", "discrete"}, {"tau", "1"}}},
                      {"nonlinearity", {{"type", "ricker"}, {"c", "1"}}}}}}}}}};
    const auto r = check_planar_criterion(model::load_model(doc));
    CHECK_FALSE(r.ratio_condition);  // min d1/a1 = 0.5 < 2 = max a2/d2
    CHECK_FALSE(r.holds);
  }
  SUBCASE("vanishing dispersal falls back to the feasibility search") {
    json doc = {{"n", 2},
                {"omega", M_PI},
                {"equations",
                 {{{"d", "2"},
                   {"a", {{"2", "sin(t)^2"}}},
                   {"terms",
                    {{{"beta", "5"},
                      {"kernel", {{"type", "discrete"}, {"tau", "pi"}}},
                      {"nonlinearity", {{"type", "ricker"}, {"c", "1"}}}}}}},
                  {{"d", "2"},
                   {"a", {{"1", "0.5"}}},
                   {"terms",
                    {{{"beta", "5"},
                      {"kernel", {{"type", "discrete"}, {"tau", "pi"}}},
                      {"nonlinearity", {{"type", "ricker"}, {"c", "1"}}}}}}}}}};
    const auto r = check_planar_criterion(model::load_model(doc));
    CHECK_FALSE(r.ratio_checkable);
    CHECK(r.ratio_condition);  // loss dominance still holds uniformly here
  }
}

TEST_CASE("coupling ratios alpha and gamma") {
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  SUBCASE("constant model: alpha = gamma = e^2") {
    const auto m = fixture("nicholson_scalar_autonomous.json");
    const auto [alpha, gamma] = compute_alpha_gamma(m, one);
    CHECK(alpha(0) == doctest::Approx(std::exp(2.0)).epsilon(1e-10));
    CHECK(gamma(0) == doctest::Approx(std::exp(2.0)).epsilon(1e-10));
  }
  SUBCASE("periodic model: range of beta") {
    const auto m = fixture("nicholson_scalar_periodic.json");
    const auto [alpha, gamma] = compute_alpha_gamma(m, one);
    CHECK(alpha(0) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(gamma(0) == doctest::Approx(5.0).epsilon(1e-10));
  }
  SUBCASE("planar fixture with dispersal in the denominator") {
    const auto m = fixture("planar_1_9.json");
    const Eigen::VectorXd ones2 = Eigen::VectorXd::Ones(2);
    const auto [alpha, gamma] = compute_alpha_gamma(m, ones2);
    // denominator 2 - 0.5 = 1.5, numerator in [5, 6]
    CHECK(alpha(0) == doctest::Approx(5.0 / 1.5).epsilon(1e-10));
    CHECK(gamma(0) == doctest::Approx(6.0 / 1.5).epsilon(1e-10));
    CHECK(alpha(1) == doctest::Approx(5.0 / 1.5).epsilon(1e-10));
  }
  SUBCASE("nonpositive denominator is an error") {
    json doc = {{"n", 2},
                {"omega", 1.0},
                {"equations",
                 {{{"d", "1"},
                   {"a", {{"2", "2"}}},
                   {"terms",
                    {{{"beta", "3"},
                      {"kernel", {{"type", "discrete"}, {"tau", "1"}}},
                      {"nonlinearity", {{"type", "ricker"}, {"c", "1"}}}}}}},
                  {{"d", "1"},
                   {"a", {{"1", "2"}}},
                   {"terms",
                    {{{"beta", "3"},
                      {"kernel", {{"type", "discrete"}, {"tau", "1"}}},
                      {"nonlinearity", {{"type", "ricker"}, {"c", "1"}}}}}}}}}};
    CHECK_THROWS_AS(compute_alpha_gamma(model::load_model(doc), Eigen::VectorXd::Ones(2)),
                    SolverError);
  }
}

TEST_CASE("attractivity criterion") {
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  SUBCASE("the delayed periodic fixture meets the conditions") {
    const auto r = check_attractivity(fixture("nicholson_scalar_periodic.json"), one);
    CHECK(r.condition_met);
    CHECK(r.delays_are_multiples);
    CHECK(r.delay_multiples == std::vector<int>{1});
    CHECK(r.gamma_i(0) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(r.threshold == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
  }
  SUBCASE("boundary case gamma = e^2 fails the strict inequality") {
    const auto m = model::load_model(scalar_doc("1", "exp(2)", "1", "pi", M_PI));
    const auto r = check_attractivity(m, one);
    CHECK_FALSE(r.condition_met);
    CHECK(r.gamma_i(0) == r.threshold);
  }
  SUBCASE("half-period point delay disables the criterion") {
    const auto m = model::load_model(scalar_doc("1", "4+sin(t)^2", "1", "pi/2", M_PI));
    const auto r = check_attractivity(m, one);
    CHECK_FALSE(r.delays_are_multiples);
    CHECK_FALSE(r.condition_met);
  }
  SUBCASE("rationally dependent delay accepted when coefficients have the reduced period") {
    const auto m = model::load_model(scalar_doc("1", "4+sin(2*t)^2", "1", "pi/2", M_PI));
    const auto r = check_attractivity(m, one);
    CHECK(r.delays_are_multiples);
    CHECK(r.base_period == doctest::Approx(M_PI / 2).epsilon(1e-12));
    CHECK(r.condition_met);
  }
  SUBCASE("autonomous models accept any constant delay") {
    const auto m = model::load_model(scalar_doc("1", "4", "1", "0.37", 1.0));
    const auto r = check_attractivity(m, one);
    CHECK(r.autonomous);
    CHECK(r.delays_are_multiples);
    CHECK(r.condition_met);  // gamma = 4 < e^2
  }
  SUBCASE("scaling v leaves the decision invariant") {
    const auto m = fixture("planar_1_9.json");
    const Eigen::VectorXd v = Eigen::VectorXd::Ones(2);
    const auto base = check_attractivity(m, v);
    const auto scaled = check_attractivity(m, 2.0 * v);
    CHECK(base.condition_met == scaled.condition_met);
    CHECK(base.alpha_i(0) == doctest::Approx(scaled.alpha_i(0)).epsilon(1e-12));
    CHECK(base.gamma_i(1) == doctest::Approx(scaled.gamma_i(1)).epsilon(1e-12));
    CHECK(base.threshold == doctest::Approx(scaled.threshold).epsilon(1e-12));
  }
  SUBCASE("density kernels are outside the criterion") {
    const auto r = check_attractivity(fixture("example_3_2.json"), Eigen::VectorXd::Ones(2));
    CHECK_FALSE(r.delays_are_multiples);
    CHECK_FALSE(r.condition_met);
  }
  SUBCASE("non-Ricker models are rejected") {
    CHECK_THROWS_AS(check_attractivity(fixture("example_3_1.json"), Eigen::VectorXd::Ones(2)),
                    Error);
  }
}

TEST_CASE("secant-slope bound of the Ricker map") {
  for (double x : {0.1, 0.5, 1.0, 1.5, 1.9}) {
    const double d = delta_of_x(x, 0.1);
    CHECK_MESSAGE(d < std::exp(-x) - 1e-8, "x = " << x);
  }
  SUBCASE("point value at the removable singularity") {
    // near y = x the divided difference approaches (1-x)e^{-x}
    const double x = 0.3;
    const double h = std::exp(-x) * (1 - x);
    const double y = x + 1e-9;
    const double g = (y * std::exp(-y) - x * std::exp(-x)) / (y - x);
    CHECK(g == doctest::Approx(h).epsilon(1e-6));
  }
  SUBCASE("brute-force scan agreement at x = 1") {
    const double hx = std::exp(-1.0);
    double best = 0.0;
    for (int k = 0; k <= 1000000; ++k) {
      const double y = 0.1 + (50.0 - 0.1) * k / 1000000.0;
      if (std::abs(y - 1.0) < 1e-12) continue;
      best = std::max(best, std::abs((y * std::exp(-y) - hx) / (y - 1.0)));
    }
    CHECK(delta_of_x(1.0, 0.1) == doctest::Approx(best).epsilon(1e-6));
  }
  SUBCASE("domain validation") {
    CHECK_THROWS_AS(delta_of_x(2.5, 0.1), Error);
    CHECK_THROWS_AS(delta_of_x(1.0, 1.5), Error);
  }
}

TEST_CASE("permanence estimates") {
  dde::SolverConfig config;
  SUBCASE("globally attracting equilibrium pins the tail window") {
    const auto m = fixture("nicholson_scalar_autonomous.json");
    const auto estimate = estimate_permanence(m, 10, 120, 10, 7, config);
    CHECK(estimate.m_emp == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(estimate.l_emp == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(estimate.all_positive);
  }
  SUBCASE("extinction control decays below any permanence floor") {
    const auto m = fixture("nicholson_scalar_extinction.json");
    const auto estimate = estimate_permanence(m, 10, 120, 10, 7, config);
    CHECK(estimate.m_emp < 1e-6);
    CHECK(estimate.l_emp < 1e-6);
  }
  SUBCASE("same seed reproduces the estimate bit for bit") {
    const auto m = fixture("nicholson_scalar_autonomous.json");
    const auto a = estimate_permanence(m, 6, 60, 6, 123, config);
    const auto b = estimate_permanence(m, 6, 60, 6, 123, config);
    CHECK(a.m_emp == b.m_emp);
    CHECK(a.l_emp == b.l_emp);
  }
}

TEST_CASE("three-patch ring end to end") {
  json equations = json::array();
  for (int i = 0; i < 3; ++i) {
    json eq;
    eq["d"] = "2+0.25*cos(t)^2";
    eq["a"] = {{std::to_string((i + 1) % 3 + 1), "0.3"}};
    eq["terms"] = json::array(
        {json{{"beta", i == 0 ? "5+sin(t)^2" : (i == 1 ? "5+cos(t)^2" : "5.5")},
              {"kernel", {{"type", "discrete"}, {"tau", i == 2 ? "2*pi" : "pi"}}},
              {"nonlinearity", {{"type", "ricker"}, {"c", i == 1 ? "1.2" : "1"}}}}});
    equations.push_back(eq);
  }
  const auto m =
      model::load_model(json{{"n", 3}, {"omega", M_PI}, {"equations", equations}});

  const auto report = check_hypotheses(m);
  CHECK(report.all_satisfied());
  CHECK(report.h(2).status == HypothesisStatus::Satisfied);  // strict loss dominance

  dde::SolverConfig config;
  const auto cache = linalg::fundamental_matrix(m, config);
  CHECK(cache.rho < 1.0);
  const auto init = periodic::default_initial_profile(m, config.steps_per_period);
  auto [phi, diag] = periodic::find_periodic_fixed_point(m, cache, init, {}, config);
  CHECK(diag.converged);
  CHECK(diag.dde_residual < 1e-5);
  CHECK(phi.min_value() > 0.0);

  const std::vector<double> ones(3, 1.0);
  const auto history = dde::HistoryFunction::constant(3, ones, -m.tau_max - 0.01, 0.0);
  auto [orbit, orbit_diag] = periodic::find_periodic_poincare(m, history, config);
  CHECK(orbit_diag.converged);
  CHECK(phi.sup_distance(orbit) < 1e-5);

  const auto attract = check_attractivity(m, Eigen::VectorXd::Ones(3));
  CHECK(attract.condition_met);
  CHECK(attract.delay_multiples == std::vector<int>{1, 1, 2});
  CHECK(attract.threshold == doctest::Approx(std::exp(2.0 / 1.2)).epsilon(1e-12));
}

TEST_CASE("two-trajectory convergence experiment") {
  const auto m = fixture("nicholson_scalar_periodic.json");
  dde::SolverConfig config;
  const std::vector<double> low{0.5}, high{5.0};
  const auto a = dde::HistoryFunction::constant(1, low, -m.tau_max - 0.01, 0.0);
  const auto b = dde::HistoryFunction::constant(1, high, -m.tau_max - 0.01, 0.0);
  SUBCASE("identical histories stay identical") {
    CHECK(analysis::convergence_experiment(m, a, a, 5, config) == 0.0);
  }
  SUBCASE("attractivity pulls distinct histories together") {
    CHECK(analysis::convergence_experiment(m, a, b, 60, config) < 1e-4);
  }
}
