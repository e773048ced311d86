#ifndef PERISOLVE_REPORT_HPP
#define PERISOLVE_REPORT_HPP

#include <json.hpp>
#include <ostream>
#include <string>

#include "perisolve/analysis.hpp"
#include "perisolve/integrator.hpp"
#include "perisolve/periodic.hpp"

namespace perisolve::report {

/// Reports keep insertion order so identical runs serialize to identical
/// bytes.
using Json = nlohmann::ordered_json;

Json to_json(const Eigen::VectorXd& v);
Json to_json(const analysis::HypothesisEntry& entry);
Json to_json(const analysis::HypothesisReport& report);
Json to_json(const analysis::ScalarExcessBirth& r);
Json to_json(const analysis::PlanarCriterion& r);
Json to_json(const analysis::AttractivityReport& r);
Json to_json(const analysis::PermanenceEstimate& r);
Json to_json(const periodic::FixedPointDiagnostics& d);
Json to_json(const periodic::PoincareDiagnostics& d);

/// Long-format CSV: one `path,value` row per scalar leaf, arrays indexed.
void write_csv(std::ostream& out, const Json& j);

void write_trajectory_csv(std::ostream& out, const dde::Trajectory& trajectory);
/// Resamples the trajectory at a fixed number of points per period.
void write_trajectory_csv_sampled(std::ostream& out, const dde::Trajectory& trajectory,
                                  double omega, int samples_per_period);
void write_profile_csv(std::ostream& out, const periodic::PeriodicProfile& profile);

}  // namespace perisolve::report

#endif
