// Benchmark comparing the OpenMP operator kernel and the permanence trials
// against their serial counterparts on a synthetic patch system.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "perisolve/analysis.hpp"
#include "perisolve/linalg.hpp"
#include "perisolve/model.hpp"
#include "perisolve/periodic.hpp"

using namespace perisolve;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// n-patch Nicholson ring with density kernels and trigonometric coefficients.
model::SystemModel synthetic_patches(int n) {
  nlohmann::json equations = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    nlohmann::json eq;
    eq["d"] = "2+0.5*sin(t)^2";
    eq["a"] = {{std::to_string((i + 1) % n + 1), "0.3+0.1*cos(t)^2"}};
    eq["terms"] = nlohmann::json::array({nlohmann::json{
        {"beta", "6+sin(t)^2"},
        {"kernel", {{"type", "density"}, {"tau", "1.5+0.25*cos(t)^2"}, {"gamma", "1"}}},
        {"nonlinearity", {{"type", "ricker"}, {"c", "1+0.3*abs(sin(t))"}}}}});
    equations.push_back(std::move(eq));
  }
  return model::load_model(
      nlohmann::json{{"n", n}, {"omega", M_PI}, {"equations", equations}}, "synthetic");
}

template <typename F>
double best_of(int reps, const F& fn) {
  double best = 1e300;
  for (int rep = 0; rep < reps; ++rep) {
    const double start = now_seconds();
    fn();
    best = std::min(best, now_seconds() - start);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int patches = argc > 1 ? std::atoi(argv[1]) : 6;
  const int grid = argc > 2 ? std::atoi(argv[2]) : 1024;

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (compiled without OpenMP)\n");
#endif

  const auto m = synthetic_patches(patches);
  dde::SolverConfig config;
  config.steps_per_period = grid;
  const auto cache = linalg::fundamental_matrix(m, config);
  const auto phi = periodic::default_initial_profile(m, grid);

  std::printf("%-28s %10s %10s %9s %12s\n", "kernel", "serial ms", "omp ms", "speedup",
              "max |diff|");

  {
    periodic::PeriodicProfile serial_out, parallel_out;
    const double serial = best_of(3, [&] {
      serial_out =
          periodic::apply_operator(m, cache, phi, config.quad_nodes, periodic::Execution::Serial);
    });
    const double parallel = best_of(3, [&] {
      parallel_out = periodic::apply_operator(m, cache, phi, config.quad_nodes,
                                              periodic::Execution::Parallel);
    });
    const auto reference = periodic::apply_operator_reference(m, cache, phi, config.quad_nodes);
    double diff = 0.0;
    for (int k = 0; k < grid; ++k)
      for (int i = 0; i < m.n; ++i)
        diff = std::max(diff, std::abs(parallel_out.value(k, i) - reference.value(k, i)));
    std::printf("%-28s %10.2f %10.2f %8.2fx %12.3e\n", "operator application",
                serial * 1e3, parallel * 1e3, serial / parallel, diff);
  }

  {
    dde::SolverConfig trial_config;
    analysis::PermanenceEstimate serial_estimate, parallel_estimate;
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    const double serial = best_of(1, [&] {
      omp_set_num_threads(1);
      serial_estimate = analysis::estimate_permanence(m, 8, 40, 8, 7, trial_config);
    });
    omp_set_num_threads(saved);
    const double parallel = best_of(1, [&] {
      parallel_estimate = analysis::estimate_permanence(m, 8, 40, 8, 7, trial_config);
    });
#else
    const double serial = best_of(1, [&] {
      serial_estimate = analysis::estimate_permanence(m, 8, 40, 8, 7, trial_config);
    });
    const double parallel = serial;
    parallel_estimate = serial_estimate;
#endif
    const double diff = std::max(std::abs(serial_estimate.m_emp - parallel_estimate.m_emp),
                                 std::abs(serial_estimate.l_emp - parallel_estimate.l_emp));
    std::printf("%-28s %10.2f %10.2f %8.2fx %12.3e\n", "permanence trials", serial * 1e3,
                parallel * 1e3, serial / parallel, diff);
  }

  return 0;
}
