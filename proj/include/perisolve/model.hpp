#ifndef PERISOLVE_MODEL_HPP
#define PERISOLVE_MODEL_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "perisolve/expr.hpp"

namespace perisolve::model {

using expr::PeriodicExpr;

enum class NonlinearityType { Ricker, MackeyGlass, ScaledRicker };

/// Birth nonlinearity h(t, x). All variants satisfy h(t,0) = 0, h >= 0, and
/// dh/dx(t,0) = 1 whenever c(t) > 0:
///   Ricker        h(t,x) = x * exp(-c(t) x)
///   MackeyGlass   h(t,x) = x / (1 + c(t) x^alpha),  alpha >= 1
///   ScaledRicker  h(t,x) = x * exp(-c(t) x^alpha),  alpha > 0
struct Nonlinearity {
  NonlinearityType type = NonlinearityType::Ricker;
  PeriodicExpr c;
  double alpha = 1.0;
  /// Worst-case constant over one period (max_t c(t)); the lower envelope
  /// h^-(x) is the same variant evaluated with this constant.
  double lower_envelope_scale = 1.0;
  /// min_t c(t), used for upper bounds on h.
  double c_min = 1.0;

  double operator()(double t, double x) const;
  /// dh/dx at constant-coefficient time t (used by the equilibrium solver).
  double derivative(double t, double x) const;
  /// sup over x >= 0 of h(t,x), worst case over t (uses c_min).
  double upper_bound() const;
  /// Lower envelope h^-(x): the variant with c frozen at the worst case.
  double lower_envelope(double x) const;
};

enum class KernelType { Discrete, Density };

/// Delay kernel: either a point evaluation at t - tau(t) or an absolutely
/// continuous density gamma(s) on [t - tau(t), t].
struct Kernel {
  KernelType type = KernelType::Discrete;
  PeriodicExpr tau;
  PeriodicExpr gamma;  // Density only
};

struct DelayTerm {
  PeriodicExpr beta;
  Kernel kernel;
  Nonlinearity nonlinearity;
};

struct Equation {
  PeriodicExpr d;
  std::vector<std::pair<int, PeriodicExpr>> off_diagonal;  // (j, a_ij), 0-based, j != i
  std::vector<DelayTerm> terms;
};

/// Immutable after load_model; safe to share across concurrent analyses.
struct SystemModel {
  int n = 0;
  double omega = 0.0;
  std::vector<Equation> equations;
  double tau_max = 0.0;  // >= sup of every delay on the verification grid
  double tau_min = 0.0;  // min of every delay on the verification grid
  bool autonomous = false;  // every coefficient constant within 1e-12
  std::string label;

  const PeriodicExpr* off_diagonal(int i, int j) const;  // a_ij or nullptr
};

/// Parses and fully validates a model document: schema, sign constraints on a
/// 512-points-per-period grid (refined 4x before a violation is reported),
/// and numeric periodicity of every coefficient.
SystemModel load_model(const nlohmann::json& doc, const std::string& label = "");
SystemModel load_model_file(const std::string& path);

/// beta_i(t): sum over delay terms of beta_ik(t) times the kernel mass
/// (1 for point kernels, the trapezoid integral of gamma over the window for
/// density kernels).
double beta_i(const SystemModel& m, int i, double t, int quad_nodes);

struct MatrixBundle {
  Eigen::MatrixXd d;  // diagonal of instantaneous loss rates
  Eigen::MatrixXd a;  // dispersal matrix, zero diagonal
  Eigen::MatrixXd b;  // diagonal of beta_i(t)
  Eigen::MatrixXd m;  // community matrix b + a - d
};

MatrixBundle community_matrices(const SystemModel& m, double t, int quad_nodes = 33);

/// D(t) - A(t), the matrix of the linear homogeneous part.
Eigen::MatrixXd d_minus_a(const SystemModel& m, double t);

double nonlinearity_eval(const Nonlinearity& nl, double t, double x);

/// Visits every coefficient expression in the model with a descriptive name.
void for_each_coefficient(const SystemModel& m,
                          const std::function<void(const std::string&, const PeriodicExpr&)>& fn);

}  // namespace perisolve::model

#endif
