#include "perisolve/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "perisolve/errors.hpp"

namespace perisolve::model {

namespace {

constexpr int kGridPerPeriod = 512;
constexpr int kRefine = 4;

struct GridScan {
  double min_value = std::numeric_limits<double>::infinity();
  double max_value = -std::numeric_limits<double>::infinity();
  double argmin = 0.0;
};

GridScan scan(const PeriodicExpr& f, double omega, int points) {
  GridScan s;
  for (int k = 0; k < points; ++k) {
    const double t = omega * k / points;
    const double v = f(t);
    if (v < s.min_value) {
      s.min_value = v;
      s.argmin = t;
    }
    s.max_value = std::max(s.max_value, v);
  }
  return s;
}

[[noreturn]] void sign_violation(const std::string& where, const char* need, double worst_v,
                                 double worst_t) {
  throw ModelError("sign violation: " + where + " must be " + need + ", found " +
                   std::to_string(worst_v) + " at t = " + std::to_string(worst_t));
}

// Grid sign check; a violation at 512 points/period is re-located on a 4x
// finer grid before being reported.
void require_sign(const PeriodicExpr& f, double omega, bool strict, const std::string& where) {
  GridScan s = scan(f, omega, kGridPerPeriod);
  const bool bad = strict ? s.min_value <= 0.0 : s.min_value < 0.0;
  if (!bad) return;
  s = scan(f, omega, kGridPerPeriod * kRefine);
  sign_violation(where, strict ? "> 0" : ">= 0", s.min_value, s.argmin);
}

void require_periodic(const PeriodicExpr& f, double omega, const std::string& where) {
  auto check = expr::check_periodicity(*f.ast(), omega, kGridPerPeriod);
  if (check.periodic) return;
  check = expr::check_periodicity(*f.ast(), omega, kGridPerPeriod * kRefine);
  if (check.periodic) return;
  throw ModelError("periodicity violation: " + where + " ('" + f.source() +
                   "') is not periodic with period " + std::to_string(omega) +
                   "; discrepancy " + std::to_string(check.max_discrepancy) + " at t = " +
                   std::to_string(check.worst_t));
}

PeriodicExpr parse_coefficient(const nlohmann::json& node, double omega,
                               const std::string& where) {
  if (!node.is_string())
    throw ModelError("schema error: " + where + " must be an expression string");
  try {
    return PeriodicExpr::parse(node.get<std::string>(), omega);
  } catch (const Error& e) {
    throw ModelError("schema error: " + where + ": " + e.what());
  }
}

bool is_constant_on_grid(const PeriodicExpr& f, double omega) {
  if (f.is_constant()) return true;
  const GridScan s = scan(f, omega, kGridPerPeriod);
  return s.max_value - s.min_value < 1e-12;
}

Nonlinearity parse_nonlinearity(const nlohmann::json& node, double omega,
                                const std::string& where) {
  if (!node.is_object()) throw ModelError("schema error: " + where + " must be an object");
  Nonlinearity nl;
  const std::string type = node.value("type", "");
  if (type == "ricker") nl.type = NonlinearityType::Ricker;
  else if (type == "mackey_glass") nl.type = NonlinearityType::MackeyGlass;
  else if (type == "scaled_ricker") nl.type = NonlinearityType::ScaledRicker;
  else throw ModelError("schema error: " + where + ".type must be one of ricker, mackey_glass, scaled_ricker");
  if (!node.contains("c")) throw ModelError("schema error: " + where + " requires c");
  nl.c = parse_coefficient(node.at("c"), omega, where + ".c");
  if (nl.type != NonlinearityType::Ricker) {
    if (!node.contains("alpha") || !node.at("alpha").is_number())
      throw ModelError("schema error: " + where + " requires numeric alpha");
    nl.alpha = node.at("alpha").get<double>();
    if (nl.type == NonlinearityType::MackeyGlass && nl.alpha < 1.0)
      throw ModelError("schema error: " + where + ".alpha must be >= 1 for mackey_glass");
    if (nl.type == NonlinearityType::ScaledRicker && nl.alpha <= 0.0)
      throw ModelError("schema error: " + where + ".alpha must be > 0 for scaled_ricker");
  }
  require_sign(nl.c, omega, /*strict=*/true, where + ".c");
  const GridScan s = scan(nl.c, omega, kGridPerPeriod);
  nl.lower_envelope_scale = s.max_value;
  nl.c_min = s.min_value;
  return nl;
}

}  // namespace

double Nonlinearity::operator()(double t, double x) const {
  const double ct = c(t);
  switch (type) {
    case NonlinearityType::Ricker:
      return x * std::exp(-ct * x);
    case NonlinearityType::MackeyGlass:
      return x / (1.0 + ct * std::pow(x, alpha));
    case NonlinearityType::ScaledRicker:
      return x * std::exp(-ct * std::pow(x, alpha));
  }
  return 0.0;
}

double Nonlinearity::derivative(double t, double x) const {
  const double ct = c(t);
  switch (type) {
    case NonlinearityType::Ricker:
      return std::exp(-ct * x) * (1.0 - ct * x);
    case NonlinearityType::MackeyGlass: {
      const double xa = std::pow(x, alpha);
      const double den = 1.0 + ct * xa;
      return (1.0 + ct * (1.0 - alpha) * xa) / (den * den);
    }
    case NonlinearityType::ScaledRicker: {
      const double xa = std::pow(x, alpha);
      return std::exp(-ct * xa) * (1.0 - ct * alpha * xa);
    }
  }
  return 0.0;
}

double Nonlinearity::upper_bound() const {
  switch (type) {
    case NonlinearityType::Ricker:
      return 1.0 / (M_E * c_min);
    case NonlinearityType::MackeyGlass: {
      if (alpha == 1.0) return 1.0 / c_min;  // supremum as x -> infinity
      const double xs = std::pow(c_min * (alpha - 1.0), -1.0 / alpha);
      return xs * (alpha - 1.0) / alpha;
    }
    case NonlinearityType::ScaledRicker: {
      const double xs = std::pow(c_min * alpha, -1.0 / alpha);
      return xs * std::exp(-1.0 / alpha);
    }
  }
  return 0.0;
}

double Nonlinearity::lower_envelope(double x) const {
  const double c_worst = lower_envelope_scale;
  switch (type) {
    case NonlinearityType::Ricker:
      return x * std::exp(-c_worst * x);
    case NonlinearityType::MackeyGlass:
      return x / (1.0 + c_worst * std::pow(x, alpha));
    case NonlinearityType::ScaledRicker:
      return x * std::exp(-c_worst * std::pow(x, alpha));
  }
  return 0.0;
}

const PeriodicExpr* SystemModel::off_diagonal(int i, int j) const {
  for (const auto& [col, a] : equations[i].off_diagonal)
    if (col == j) return &a;
  return nullptr;
}

SystemModel load_model(const nlohmann::json& doc, const std::string& label) {
  if (!doc.is_object()) throw ModelError("schema error: document must be a JSON object");
  SystemModel m;
  m.label = label;
  if (!doc.contains("n") || !doc.at("n").is_number_integer())
    throw ModelError("schema error: n must be an integer");
  if (!doc.contains("omega") || !doc.at("omega").is_number())
    throw ModelError("schema error: omega must be a number");
  m.n = doc.at("n").get<int>();
  m.omega = doc.at("omega").get<double>();
  if (m.n < 1) throw ModelError("schema error: n must be >= 1");
  if (!(m.omega > 0.0)) throw ModelError("schema error: omega must be > 0");
  if (!doc.contains("equations") || !doc.at("equations").is_array())
    throw ModelError("schema error: equations must be an array");
  const auto& eqs = doc.at("equations");
  if (static_cast<int>(eqs.size()) != m.n)
    throw ModelError("schema error: expected " + std::to_string(m.n) + " equations, found " +
                     std::to_string(eqs.size()));

  m.tau_min = std::numeric_limits<double>::infinity();
  bool any_delay = false;
  bool all_constant = true;
  std::vector<const PeriodicExpr*> coefficients;

  for (int i = 0; i < m.n; ++i) {
    const auto& eq_doc = eqs.at(i);
    const std::string eq_where = "equations[" + std::to_string(i + 1) + "]";
    if (!eq_doc.is_object()) throw ModelError("schema error: " + eq_where + " must be an object");
    Equation eq;
    if (!eq_doc.contains("d")) throw ModelError("schema error: " + eq_where + " requires d");
    eq.d = parse_coefficient(eq_doc.at("d"), m.omega, eq_where + ".d");
    require_sign(eq.d, m.omega, /*strict=*/true, eq_where + ".d");

    if (eq_doc.contains("a")) {
      const auto& a_doc = eq_doc.at("a");
      if (!a_doc.is_object())
        throw ModelError("schema error: " + eq_where + ".a must map indices to expressions");
      for (const auto& [key, value] : a_doc.items()) {
        int j = 0;
        try {
          j = std::stoi(key);
        } catch (...) {
          throw ModelError("schema error: " + eq_where + ".a key '" + key +
                           "' is not a 1-based index");
        }
        if (j < 1 || j > m.n || j == i + 1)
          throw ModelError("schema error: " + eq_where + ".a key '" + key +
                           "' is out of range or on the diagonal");
        const std::string where = eq_where + ".a[" + key + "]";
        PeriodicExpr a = parse_coefficient(value, m.omega, where);
        require_sign(a, m.omega, /*strict=*/false, where);
        eq.off_diagonal.emplace_back(j - 1, std::move(a));
      }
      std::sort(eq.off_diagonal.begin(), eq.off_diagonal.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
    }

    if (eq_doc.contains("terms")) {
      const auto& terms_doc = eq_doc.at("terms");
      if (!terms_doc.is_array())
        throw ModelError("schema error: " + eq_where + ".terms must be an array");
      for (std::size_t k = 0; k < terms_doc.size(); ++k) {
        const std::string term_where = eq_where + ".terms[" + std::to_string(k + 1) + "]";
        const auto& term_doc = terms_doc.at(k);
        if (!term_doc.is_object())
          throw ModelError("schema error: " + term_where + " must be an object");
        DelayTerm term;
        if (!term_doc.contains("beta"))
          throw ModelError("schema error: " + term_where + " requires beta");
        term.beta = parse_coefficient(term_doc.at("beta"), m.omega, term_where + ".beta");
        require_sign(term.beta, m.omega, /*strict=*/false, term_where + ".beta");

        if (!term_doc.contains("kernel") || !term_doc.at("kernel").is_object())
          throw ModelError("schema error: " + term_where + " requires a kernel object");
        const auto& kernel_doc = term_doc.at("kernel");
        const std::string kernel_type = kernel_doc.value("type", "");
        if (kernel_type == "discrete") term.kernel.type = KernelType::Discrete;
        else if (kernel_type == "density") term.kernel.type = KernelType::Density;
        else throw ModelError("schema error: " + term_where + ".kernel.type must be discrete or density");
        if (!kernel_doc.contains("tau"))
          throw ModelError("schema error: " + term_where + ".kernel requires tau");
        term.kernel.tau =
            parse_coefficient(kernel_doc.at("tau"), m.omega, term_where + ".kernel.tau");
        require_sign(term.kernel.tau, m.omega, /*strict=*/false, term_where + ".kernel.tau");
        if (term.kernel.type == KernelType::Density) {
          if (!kernel_doc.contains("gamma"))
            throw ModelError("schema error: " + term_where + ".kernel requires gamma");
          term.kernel.gamma =
              parse_coefficient(kernel_doc.at("gamma"), m.omega, term_where + ".kernel.gamma");
          require_sign(term.kernel.gamma, m.omega, /*strict=*/false,
                       term_where + ".kernel.gamma");
        }

        if (!term_doc.contains("nonlinearity"))
          throw ModelError("schema error: " + term_where + " requires nonlinearity");
        term.nonlinearity = parse_nonlinearity(term_doc.at("nonlinearity"), m.omega,
                                               term_where + ".nonlinearity");

        const GridScan tau_scan = scan(term.kernel.tau, m.omega, kGridPerPeriod);
        m.tau_max = std::max(m.tau_max, tau_scan.max_value);
        m.tau_min = std::min(m.tau_min, tau_scan.min_value);
        any_delay = true;
        eq.terms.push_back(std::move(term));
      }
    }
    m.equations.push_back(std::move(eq));
  }

  if (!any_delay) m.tau_min = 0.0;

  // Periodicity and constancy of every coefficient, after all signs pass.
  for (int i = 0; i < m.n; ++i) {
    const Equation& eq = m.equations[i];
    const std::string eq_where = "equations[" + std::to_string(i + 1) + "]";
    auto visit = [&](const PeriodicExpr& f, const std::string& where) {
      require_periodic(f, m.omega, where);
      if (!is_constant_on_grid(f, m.omega)) all_constant = false;
    };
    visit(eq.d, eq_where + ".d");
    for (const auto& [j, a] : eq.off_diagonal)
      visit(a, eq_where + ".a[" + std::to_string(j + 1) + "]");
    for (std::size_t k = 0; k < eq.terms.size(); ++k) {
      const std::string term_where = eq_where + ".terms[" + std::to_string(k + 1) + "]";
      visit(eq.terms[k].beta, term_where + ".beta");
      visit(eq.terms[k].kernel.tau, term_where + ".kernel.tau");
      if (eq.terms[k].kernel.type == KernelType::Density)
        visit(eq.terms[k].kernel.gamma, term_where + ".kernel.gamma");
      visit(eq.terms[k].nonlinearity.c, term_where + ".nonlinearity.c");
    }
  }
  m.autonomous = all_constant;

  // Small headroom over the grid maximum so delayed lookups never leave the
  // recorded history span.
  if (m.tau_max > 0.0) m.tau_max *= 1.0 + 1e-12;
  return m;
}

SystemModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("schema error: " + path + ": " + e.what());
  }
  return load_model(doc, path);
}

double beta_i(const SystemModel& m, int i, double t, int quad_nodes) {
  if (i < 0 || i >= m.n) throw Error("beta_i: equation index out of range");
  if (quad_nodes < 2) throw Error("beta_i: quad_nodes must be >= 2");
  double total = 0.0;
  for (const DelayTerm& term : m.equations[i].terms) {
    const double b = term.beta(t);
    if (term.kernel.type == KernelType::Discrete) {
      total += b;
      continue;
    }
    const double tau = term.kernel.tau(t);
    if (tau <= 0.0) continue;
    const double h = tau / (quad_nodes - 1);
    double integral = 0.5 * (term.kernel.gamma(t - tau) + term.kernel.gamma(t));
    for (int q = 1; q < quad_nodes - 1; ++q) integral += term.kernel.gamma(t - tau + q * h);
    total += b * integral * h;
  }
  return total;
}

Eigen::MatrixXd d_minus_a(const SystemModel& m, double t) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.n, m.n);
  for (int i = 0; i < m.n; ++i) {
    out(i, i) = m.equations[i].d(t);
    for (const auto& [j, a] : m.equations[i].off_diagonal) out(i, j) = -a(t);
  }
  return out;
}

MatrixBundle community_matrices(const SystemModel& m, double t, int quad_nodes) {
  MatrixBundle out;
  out.d = Eigen::MatrixXd::Zero(m.n, m.n);
  out.a = Eigen::MatrixXd::Zero(m.n, m.n);
  out.b = Eigen::MatrixXd::Zero(m.n, m.n);
  for (int i = 0; i < m.n; ++i) {
    out.d(i, i) = m.equations[i].d(t);
    out.b(i, i) = beta_i(m, i, t, quad_nodes);
    for (const auto& [j, a] : m.equations[i].off_diagonal) out.a(i, j) = a(t);
  }
  out.m = out.b + out.a - out.d;
  return out;
}

double nonlinearity_eval(const Nonlinearity& nl, double t, double x) {
  if (x < 0.0) throw Error("nonlinearity_eval requires x >= 0");
  return nl(t, x);
}

void for_each_coefficient(
    const SystemModel& m,
    const std::function<void(const std::string&, const PeriodicExpr&)>& fn) {
  for (int i = 0; i < m.n; ++i) {
    const Equation& eq = m.equations[i];
    const std::string eq_where = "equations[" + std::to_string(i + 1) + "]";
    fn(eq_where + ".d", eq.d);
    for (const auto& [j, a] : eq.off_diagonal)
      fn(eq_where + ".a[" + std::to_string(j + 1) + "]", a);
    for (std::size_t k = 0; k < eq.terms.size(); ++k) {
      const std::string term_where = eq_where + ".terms[" + std::to_string(k + 1) + "]";
      fn(term_where + ".beta", eq.terms[k].beta);
      fn(term_where + ".kernel.tau", eq.terms[k].kernel.tau);
      if (eq.terms[k].kernel.type == KernelType::Density)
        fn(term_where + ".kernel.gamma", eq.terms[k].kernel.gamma);
      fn(term_where + ".nonlinearity.c", eq.terms[k].nonlinearity.c);
    }
  }
}

}  // namespace perisolve::model
