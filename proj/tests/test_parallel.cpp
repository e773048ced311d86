#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "perisolve/analysis.hpp"
#include "perisolve/periodic.hpp"

using namespace perisolve;

namespace {

const std::string fixture_dir = PERISOLVE_FIXTURE_DIR;

periodic::PeriodicProfile wavy_profile(const model::SystemModel& m, int grid) {
  std::vector<double> values(static_cast<std::size_t>(grid) * m.n);
  for (int k = 0; k < grid; ++k)
    for (int i = 0; i < m.n; ++i)
      values[static_cast<std::size_t>(k) * m.n + i] =
          1.0 + 0.4 * std::sin(2 * M_PI * k / grid + i);
  return periodic::PeriodicProfile::from_values(m.omega, grid, m.n, std::move(values));
}

}  // namespace

TEST_CASE("parallel operator kernel matches the serial reference") {
  for (const char* name : {"nicholson_scalar_periodic.json", "example_3_1.json",
                           "example_3_2.json", "planar_1_9.json"}) {
    const auto m = model::load_model_file(fixture_dir + "/" + std::string(name));
    dde::SolverConfig config;
    const auto cache = linalg::fundamental_matrix(m, config);
    const auto phi = wavy_profile(m, config.steps_per_period);

    const auto parallel =
        periodic::apply_operator(m, cache, phi, config.quad_nodes, periodic::Execution::Parallel);
    const auto serial =
        periodic::apply_operator(m, cache, phi, config.quad_nodes, periodic::Execution::Serial);
    const auto reference = periodic::apply_operator_reference(m, cache, phi, config.quad_nodes);

    double worst_parallel = 0.0, worst_serial = 0.0;
    for (int k = 0; k < config.steps_per_period; ++k)
      for (int i = 0; i < m.n; ++i) {
        worst_parallel =
            std::max(worst_parallel, std::abs(parallel.value(k, i) - reference.value(k, i)));
        worst_serial =
            std::max(worst_serial, std::abs(serial.value(k, i) - reference.value(k, i)));
      }
    CHECK_MESSAGE(worst_parallel < 1e-13, name);
    CHECK_MESSAGE(worst_serial < 1e-13, name);
  }
}

TEST_CASE("permanence estimates do not depend on the thread count") {
  const auto m = model::load_model_file(fixture_dir + "/nicholson_scalar_autonomous.json");
  dde::SolverConfig config;
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto single = analysis::estimate_permanence(m, 6, 40, 5, 2024, config);
  omp_set_num_threads(std::max(2, saved));
  const auto multi = analysis::estimate_permanence(m, 6, 40, 5, 2024, config);
  omp_set_num_threads(saved);
  CHECK(single.m_emp == multi.m_emp);
  CHECK(single.l_emp == multi.l_emp);
#else
  const auto a = analysis::estimate_permanence(m, 6, 40, 5, 2024, config);
  const auto b = analysis::estimate_permanence(m, 6, 40, 5, 2024, config);
  CHECK(a.m_emp == b.m_emp);
  CHECK(a.l_emp == b.l_emp);
#endif
}
