#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "perisolve/integrator.hpp"
#include "perisolve/model.hpp"

using namespace perisolve;
using nlohmann::json;

namespace {

const std::string fixture_dir = PERISOLVE_FIXTURE_DIR;

model::SystemModel fixture(const std::string& name) {
  return model::load_model_file(fixture_dir + "/" + name);
}

// x' = -x: scalar model with no delay terms.
model::SystemModel pure_decay() {
  return model::load_model(json{{"n", 1}, {"omega", 1.0}, {"equations", {{{"d", "1"}}}}});
}

// x' = -x + x(t-1): Ricker with vanishing exponent coefficient is exactly
// linear in double precision.
model::SystemModel linear_delay() {
  return model::load_model(json{
      {"n", 1},
      {"omega", 1.0},
      {"equations",
       {{{"d", "1"},
         {"terms",
          {{{"beta", "1"},
            {"kernel", {{"type", "discrete"}, {"tau", "1"}}},
            {"nonlinearity", {{"type", "ricker"}, {"c", "1e-300"}}}}}}}}}});
}

dde::HistoryFunction constant_history(int n, double value, double span) {
  const std::vector<double> x(static_cast<std::size_t>(n), value);
  return dde::HistoryFunction::constant(n, x, -span, 0.0);
}

}  // namespace

TEST_CASE("rhs at the scalar equilibrium vanishes") {
  const model::SystemModel m = fixture("nicholson_scalar_autonomous.json");
  const auto history = constant_history(1, 2.0, 1.0 + 1e-9);
  const auto f = dde::rhs(m, 0.0, history, 33);
  CHECK(f[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rhs reduces to the linear part without delay terms") {
  const model::SystemModel m = pure_decay();
  const auto history = constant_history(1, 3.0, 0.5);
  CHECK(dde::rhs(m, 0.0, history, 33)[0] == doctest::Approx(-3.0));
}

TEST_CASE("rhs reduces to the linear flow when no delay terms are present") {
  json doc = {{"n", 2},
              {"omega", 1.0},
              {"equations",
               {{{"d", "1"}, {"a", {{"2", "0.5"}}}}, {{"d", "2"}, {"a", {{"1", "0.25"}}}}}}};
  const model::SystemModel m = model::load_model(doc);
  const std::vector<double> x0{3.0, 4.0};
  const auto history = dde::HistoryFunction::constant(2, x0, -0.5, 0.0);
  const auto f = dde::rhs(m, 0.0, history, 33);
  CHECK(f[0] == doctest::Approx(-3.0 + 0.5 * 4.0));
  CHECK(f[1] == doctest::Approx(-2.0 * 4.0 + 0.25 * 3.0));
}

TEST_CASE("density kernel contributes nothing on the zero history") {
  json doc = json{{"n", 1},
                  {"omega", 1.0},
                  {"equations",
                   {{{"d", "1"},
                     {"terms",
                      {{{"beta", "1"},
                        {"kernel", {{"type", "density"}, {"tau", "1"}, {"gamma", "1"}}},
                        {"nonlinearity", {{"type", "ricker"}, {"c", "1"}}}}}}}}}};
  const model::SystemModel m = model::load_model(doc);
  std::vector<double> zero{0.0};
  dde::HistoryFunction history(1);
  std::vector<double> d0{0.0};
  history.append(-2.0, zero, d0);
  history.append(0.0, zero, d0);
  // zero at 0 is not admissible for integrate(), but rhs itself is defined
  CHECK(dde::rhs(m, 0.0, history, 33)[0] == doctest::Approx(0.0));
}

TEST_CASE("undelayed exponential decay matches the analytic solution") {
  const model::SystemModel m = pure_decay();
  const auto trajectory = dde::integrate(m, constant_history(1, 1.0, 0.1), 1.0);
  CHECK(dde::sample(trajectory, 1.0)[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
  CHECK(dde::sample(trajectory, 0.5)[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-8));
}

TEST_CASE("constant equilibria are preserved") {
  SUBCASE("scalar Nicholson at x = 2") {
    const model::SystemModel m = fixture("nicholson_scalar_autonomous.json");
    const auto trajectory = dde::integrate(m, constant_history(1, 2.0, m.tau_max + 0.01), 5.0);
    for (double t = 0.5; t <= 5.0; t += 0.5)
      CHECK(dde::sample(trajectory, t)[0] == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("x' = -x + x(t-1) keeps any constant") {
    const model::SystemModel m = linear_delay();
    const auto trajectory = dde::integrate(m, constant_history(1, 5.0, 1.01), 3.0);
    CHECK(dde::sample(trajectory, 3.0)[0] == doctest::Approx(5.0).epsilon(1e-12));
  }
}

TEST_CASE("horizons that are not step multiples end with a partial step") {
  const model::SystemModel m = pure_decay();
  const double t_end = 0.7611;
  const auto trajectory = dde::integrate(m, constant_history(1, 1.0, 0.1), t_end);
  CHECK(trajectory.history.span_end() == doctest::Approx(t_end).epsilon(1e-15));
  CHECK(dde::sample(trajectory, t_end)[0] ==
        doctest::Approx(std::exp(-t_end)).epsilon(1e-10));
}

TEST_CASE("sampling hits knots exactly and reproduces linear segments") {
  const model::SystemModel m = pure_decay();
  const auto trajectory = dde::integrate(m, constant_history(1, 1.0, 0.1), 1.0);
  const auto& h = trajectory.history;
  const std::size_t k = h.knots() / 2;
  CHECK(dde::sample(trajectory, h.knot_time(k))[0] == h.knot_value(k, 0));

  dde::HistoryFunction line(1);
  std::vector<double> v0{1.0}, v1{3.0}, d{2.0};
  line.append(0.0, v0, d);
  line.append(1.0, v1, d);
  CHECK(line.eval(0.25)[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(line.eval(1.5), SolverError);
}

TEST_CASE("Hermite segments reproduce random cubics exactly") {
  std::mt19937_64 rng(77);
  const auto coefficient = [&] {
    return (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 4.0;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const double c0 = coefficient(), c1 = coefficient(), c2 = coefficient(),
                 c3 = coefficient();
    const auto p = [&](double t) { return c0 + t * (c1 + t * (c2 + t * c3)); };
    const auto dp = [&](double t) { return c1 + t * (2 * c2 + t * 3 * c3); };
    dde::HistoryFunction h(1);
    std::vector<double> v(1), d(1);
    for (double t : {-1.0, -0.3, 0.4, 1.0}) {
      v[0] = p(t);
      d[0] = dp(t);
      h.append(t, v, d);
    }
    for (double t = -1.0; t <= 1.0; t += 0.09)
      CHECK(h.eval_component(t, 0) == doctest::Approx(p(t)).epsilon(1e-12));
  }
}

TEST_CASE("RK4 with dense history lookups keeps fourth order on a DDE") {
  const model::SystemModel m = linear_delay();

  // smooth, positive, non-constant history
  const auto history_at = [](double t) { return 2.0 + std::sin(t); };
  const auto make_history = [&](int steps) {
    dde::HistoryFunction h(1);
    std::vector<double> v(1), d(1);
    for (int j = -steps; j <= 0; ++j) {
      const double t = static_cast<double>(j) / steps;
      v[0] = history_at(t);
      d[0] = std::cos(t);
      h.append(t, v, d);
    }
    return h;
  };

  const double t_end = 4.0;
  dde::SolverConfig coarse;
  coarse.steps_per_period = 64;
  dde::SolverConfig half;
  half.steps_per_period = 128;
  dde::SolverConfig reference;
  reference.steps_per_period = 2048;  // 16x finer than the halved run

  const auto run = [&](const dde::SolverConfig& config) {
    return dde::integrate(m, make_history(config.steps_per_period), t_end, config);
  };
  const auto t_coarse = run(coarse);
  const auto t_half = run(half);
  const auto t_reference = run(reference);

  const auto max_error = [&](const dde::Trajectory& traj) {
    double worst = 0.0;
    for (double t = 0.125; t <= t_end; t += 0.125)
      worst = std::max(worst,
                       std::abs(dde::sample(traj, t)[0] - dde::sample(t_reference, t)[0]));
    return worst;
  };
  const double e_coarse = max_error(t_coarse);
  const double e_half = max_error(t_half);
  const double gain = e_coarse / e_half;
  CHECK(gain >= 12.0);
  CHECK(gain <= 20.0);
}

TEST_CASE("positivity is enforced along fixture trajectories") {
  for (const char* name : {"example_3_1.json", "example_3_2.json"}) {
    const model::SystemModel m = fixture(name);
    const auto trajectory =
        dde::integrate(m, constant_history(m.n, 1.0, m.tau_max + 0.01), 50.0 * m.omega);
    double lowest = 1e300;
    for (std::size_t k = 0; k < trajectory.history.knots(); ++k)
      if (trajectory.history.knot_time(k) >= 0.0)
        for (int i = 0; i < m.n; ++i)
          lowest = std::min(lowest, trajectory.history.knot_value(k, i));
    CHECK_MESSAGE(lowest > 0.0, name);
  }
}

TEST_CASE("trajectories from a large box stay bounded (dissipativity evidence)") {
  for (const char* name : {"example_3_1.json", "example_3_2.json",
        "nicholson_scalar_periodic.json"}) {
    const model::SystemModel m = fixture(name);
    const auto trajectory =
        dde::integrate(m, constant_history(m.n, 100.0, m.tau_max + 0.01), 60.0 * m.omega);
    double tail_max = 0.0;
    for (std::size_t k = 0; k < trajectory.history.knots(); ++k)
      if (trajectory.history.knot_time(k) >= 40.0 * m.omega)
        for (int i = 0; i < m.n; ++i)
          tail_max = std::max(tail_max, trajectory.history.knot_value(k, i));
    CHECK_MESSAGE(tail_max < 20.0, name);
  }
}

TEST_CASE("admissibility of the initial history is enforced") {
  const model::SystemModel m = fixture("nicholson_scalar_autonomous.json");
  CHECK_THROWS_AS(dde::integrate(m, constant_history(1, 0.0, 1.01), 1.0), Error);

  dde::HistoryFunction negative(1);
  std::vector<double> bad{-0.5}, good{1.0}, d{0.0};
  negative.append(-1.01, bad, d);
  negative.append(0.0, good, d);
  CHECK_THROWS_AS(dde::integrate(m, negative, 1.0), Error);
}

TEST_CASE("delay-term contributions respect the analytic bound") {
  const model::SystemModel m = fixture("example_3_2.json");
  const std::vector<double> level{7.3, 7.3};
  auto history = dde::HistoryFunction::constant(2, level, -m.tau_max - 0.01, 3.0);
  for (double t : {0.0, 0.9, 2.2}) {
    const auto f = dde::rhs(m, t, history, 33);
    for (int i = 0; i < 2; ++i) {
      const auto& term = m.equations[i].terms[0];
      const double tau = term.kernel.tau(t);
      const double cap = term.beta(t) * term.nonlinearity.upper_bound() * tau * 1.0;
      const double linear = -m.equations[i].d(t) * 7.3 +
                            (i == 0 ? m.equations[0].off_diagonal[0].second(t)
                                    : m.equations[1].off_diagonal[0].second(t)) *
                                7.3;
      CHECK(f[i] - linear <= cap + 1e-9);
    }
  }
}

TEST_CASE("vanishing delays are flagged") {
  const model::SystemModel m = fixture("example_3_1.json");  // tau = sin^2 t touches zero
  const auto trajectory =
      dde::integrate(m, constant_history(2, 1.0, m.tau_max + 0.01), m.omega);
  CHECK_FALSE(trajectory.warnings.empty());
}
