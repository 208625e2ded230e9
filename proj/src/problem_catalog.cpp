#include "semilinear/problem_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semilinear/errors.hpp"
#include "semilinear/expression.hpp"

namespace semilinear {

namespace {

constexpr double kClamp = 1e-14;

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double param(const Parameters& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void check_keys(const std::string& name, const Parameters& params, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("problem '" + name + "' has no parameter '" + key + "'");
    if (!std::isfinite(value)) throw ConfigError("parameter '" + key + "' is not finite");
  }
}

// u = x1 x2 F(rho), F = sgn(L)|L|^p, L = -log rho. The signed power extends u
// past the circle, where L changes sign.
FieldPtr log_counterexample_field(double p) {
  struct Radial {
    double f, f1, f2;
  };
  auto radial = [p](double rho) {
    rho = std::max(rho, kClamp);
    const double l = -std::log(rho);
    const double al = std::abs(l);
    if (al == 0.0) return Radial{0.0, 0.0, 0.0};
    const double fl = p * std::pow(al, p - 1.0);
    const double fll = p * (p - 1.0) * std::pow(al, p - 2.0) * sgn(l);
    return Radial{sgn(l) * std::pow(al, p), -fl / rho, (fll + fl) / (rho * rho)};
  };
  auto value = [radial](double x1, double x2) {
    const double rho = std::hypot(x1, x2);
    return rho < kClamp ? 0.0 : x1 * x2 * radial(rho).f;
  };
  auto gradient = [radial](double x1, double x2) -> Eigen::Vector2d {
    const double rho = std::hypot(x1, x2);
    if (rho < kClamp) return Eigen::Vector2d::Zero();
    const Radial r = radial(rho);
    const double pp = x1 * x2;
    return {x2 * r.f + pp * r.f1 * x1 / rho, x1 * r.f + pp * r.f1 * x2 / rho};
  };
  auto hessian = [radial](double x1, double x2) -> Eigen::Matrix2d {
    const double rho = std::max(std::hypot(x1, x2), kClamp);
    const Radial r = radial(rho);
    const Eigen::Vector2d x(x1, x2);
    const Eigen::Vector2d dp(x2, x1);
    Eigen::Matrix2d d2p;
    d2p << 0.0, 1.0, 1.0, 0.0;
    const double pp = x1 * x2;
    const Eigen::Matrix2d xx = x * x.transpose();
    return d2p * r.f + (dp * x.transpose() + x * dp.transpose()) * r.f1 / rho +
           pp * (r.f2 * xx / (rho * rho) + r.f1 * (Eigen::Matrix2d::Identity() / rho - xx / (rho * rho * rho)));
  };
  auto laplacian = [radial](double x1, double x2) {
    const double rho = std::max(std::hypot(x1, x2), kClamp);
    const Radial r = radial(rho);
    return x1 * x2 * (r.f2 + 5.0 * r.f1 / rho);
  };
  return std::make_shared<AnalyticField>(value, gradient, hessian, laplacian);
}

FieldPtr piecewise_quadratic(std::function<double(double, double)> value, std::function<Eigen::Vector2d(double, double)> grad,
                             std::function<Eigen::Matrix2d(double, double)> hess) {
  return std::make_shared<AnalyticField>(std::move(value), std::move(grad), std::move(hess));
}

CatalogEntry log_counterexample(const Parameters& params) {
  check_keys("log_counterexample_p", params, {"p"});
  const double p = param(params, "p", 0.5);
  if (!(p > 0.0) || p > 1.0) throw ConfigError("log_counterexample_p needs p in (0, 1]");
  CatalogEntry e;
  e.name = "log_counterexample_p";
  e.parameters = {{"p", p}};
  e.reference = log_counterexample_field(p);
  const FieldPtr ref = e.reference;
  e.rhs = RhsSpec::continuous([ref](double x1, double x2, double) { return ref->laplacian(x1, x2); });
  e.rhs.flags.omega_descriptor = "zero (t-independent)";
  e.rhs.flags.omega = [](double) { return 0.0; };
  e.rhs.flags.theta0 = 1.0;
  e.boundary = [](double, double) { return 0.0; };
  e.boundary_descriptor = "0";
  e.expected = {"no", p, "continuous Laplacian; Newtonian potential not C^{1,1}"};
  e.provenance = "explicit function with continuous Laplacian that is not C^{1,1}";
  e.clamps = {"|x| < 1e-14: value and gradient 0, Hessian evaluated at |x| = 1e-14",
              "|x| > 1: F = sgn(L)|L|^p with L = -log|x|"};
  e.solvable = false;
  e.inner_radius = 0.125;
  e.outer_margin = 0.125;
  e.diagnose_grid = 1025;
  e.r0 = 0.125;
  e.scales = 3;
  return e;
}

CatalogEntry halfspace_obstacle(const Parameters& params) {
  check_keys("classical_obstacle_halfspace", params, {});
  CatalogEntry e;
  e.name = "classical_obstacle_halfspace";
  e.rhs = RhsSpec::two_phase([](double, double, double) { return 1.0; }, [](double, double, double) { return 0.0; });
  e.rhs.flags.omega_descriptor = "zero";
  e.rhs.flags.omega = [](double) { return 0.0; };
  e.rhs.flags.sigma0 = 1.0;
  e.boundary = [](double x1, double) { return x1 > 0.0 ? 0.5 * x1 * x1 : 0.0; };
  e.boundary_descriptor = "max(x1,0)^2/2";
  e.reference = piecewise_quadratic(
      [](double x1, double) { return x1 > 0.0 ? 0.5 * x1 * x1 : 0.0; },
      [](double x1, double) { return Eigen::Vector2d(std::max(x1, 0.0), 0.0); },
      [](double x1, double) {
        Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
        m(0, 0) = x1 > 0.0 ? 1.0 : 0.0;
        return m;
      });
  e.expected = {"yes", std::nullopt, "B holds with sigma0 = 1"};
  e.provenance = "classical obstacle problem, g1 = 1, g2 = 0";
  e.exclude_free_boundary = true;
  return e;
}

CatalogEntry unstable_obstacle(const Parameters& params) {
  check_keys("unstable_obstacle", params, {"K"});
  const double k = param(params, "K", 1.0);
  CatalogEntry e;
  e.name = "unstable_obstacle";
  e.parameters = {{"K", k}};
  e.rhs = RhsSpec::two_phase([](double, double, double) { return -1.0; }, [](double, double, double) { return 0.0; });
  e.rhs.flags.omega_descriptor = "zero";
  e.rhs.flags.omega = [](double) { return 0.0; };
  e.rhs.flags.sigma0 = -1.0;
  e.boundary = [k](double x1, double x2) { return k * (x1 * x1 - x2 * x2); };
  e.boundary_descriptor = "K*(x1^2-x2^2)";
  e.expected = {"unknown", std::nullopt, "B fails (g1 - g2 = -1)"};
  e.provenance = "unstable obstacle problem, g1 = -1, g2 = 0";
  e.exclude_free_boundary = true;
  return e;
}

CatalogEntry membrane(const Parameters& params) {
  check_keys("two_phase_membrane", params, {"K", "a"});
  const double k = param(params, "K", 0.0);
  const double a = param(params, "a", 0.0);
  if (a < 0.0) throw ConfigError("two_phase_membrane needs a >= 0");
  CatalogEntry e;
  e.name = "two_phase_membrane";
  e.parameters = {{"K", k}, {"a", a}};
  e.rhs = RhsSpec::two_phase([a](double x1, double, double) { return 1.0 + a * std::sqrt(std::abs(x1)); },
                             [](double, double, double) { return -1.0; });
  e.rhs.flags.omega_descriptor = "zero";
  e.rhs.flags.omega = [](double) { return 0.0; };
  e.rhs.flags.sigma0 = 2.0;
  e.rhs.flags.notes = "lambda1 = 1 + a|x1|^(1/2) (Hoelder 1/2), lambda2 = 1";
  e.boundary = [k](double x1, double x2) { return 0.5 * x1 * std::abs(x1) + k * x1 * x2; };
  e.boundary_descriptor = "x1|x1|/2 + K*x1*x2";
  if (k == 0.0 && a == 0.0) {
    e.reference = piecewise_quadratic([](double x1, double) { return 0.5 * x1 * std::abs(x1); },
                                      [](double x1, double) { return Eigen::Vector2d(std::abs(x1), 0.0); },
                                      [](double x1, double) {
                                        Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
                                        m(0, 0) = sgn(x1);
                                        return m;
                                      });
  }
  e.expected = {"yes", std::nullopt, "B holds with sigma0 = 2"};
  e.provenance = "two-phase membrane problem with Hoelder coefficients";
  e.exclude_free_boundary = true;
  return e;
}

CatalogEntry dini_borderline(const Parameters& params) {
  check_keys("dini_borderline", params, {});
  auto f = [](double t) {
    const double a = std::abs(t);
    if (a < kClamp) return 0.0;
    return sgn(t) / -std::log(std::min(a, 0.5));
  };
  CatalogEntry e;
  e.name = "dini_borderline";
  e.rhs = RhsSpec::continuous([f](double, double, double t) { return f(t); });
  e.rhs.flags.omega_descriptor = "1/(-log s)";
  e.rhs.flags.omega = [](double s) { return s < kClamp ? 0.0 : 1.0 / -std::log(std::min(s, 0.5)); };
  e.rhs.flags.h_bound = 2.0;
  e.boundary = [](double x1, double x2) { return 0.1 * x1 * x2; };
  e.boundary_descriptor = "0.1*x1*x2";
  e.expected = {"yes", std::nullopt, "continuous in t, no jump (B margin 0); modulus not Dini"};
  e.provenance = "odd reflection of -1/log(t)";
  e.clamps = {"|t| < 1e-14: f = 0", "|t| > 1/2: f = sgn(t)/log 2"};
  return e;
}

CatalogEntry mixed_pathology(const Parameters& params) {
  check_keys("mixed_pathology", params, {"p"});
  const double p = param(params, "p", 2.0);
  if (!(p > 1.0)) throw ConfigError("mixed_pathology needs p > 1");
  static constexpr double x2_cap = 0.5;
  const double t_cap = std::exp(-1.0);
  auto f = [p, t_cap](double x1, double x2, double t) {
    const double a2 = std::abs(x2);
    const double at = std::abs(t);
    if (a2 < kClamp || at < kClamp) return 0.0;
    return x1 / (std::log(std::min(a2, x2_cap)) * std::pow(-std::log(std::min(at, t_cap)), p));
  };
  CatalogEntry e;
  e.name = "mixed_pathology";
  e.parameters = {{"p", p}};
  e.rhs = RhsSpec::continuous(f);
  e.rhs.flags.omega_descriptor = "(-log s)^(-p)";
  e.rhs.flags.omega = [p, t_cap](double s) { return s < kClamp ? 0.0 : std::pow(-std::log(std::min(s, t_cap)), -p); };
  e.rhs.flags.h_bound = 2.0 / std::log(2.0);
  e.boundary = [](double x1, double) { return 0.25 * x1; };
  e.boundary_descriptor = "x1/4";
  e.expected = {"yes", std::nullopt, "A holds; x-dependence only log-continuous across x2 = 0"};
  e.provenance = "x1/(log|x2| (-log|t|)^p)";
  e.clamps = {"|x2| < 1e-14 or |t| < 1e-14: f = 0", "|x2| > 1/2 uses |x2| = 1/2", "|t| > 1/e uses |t| = 1/e"};
  e.guard = [](double, double x2, double h) { return std::abs(x2) < 4.0 * h; };
  return e;
}

CatalogEntry separable(const Parameters& params) {
  check_keys("separable", params, {});
  CatalogEntry e;
  e.name = "separable";
  e.rhs = RhsSpec::continuous([](double x1, double, double t) {
    return (1.0 + 0.5 * std::sqrt(std::abs(x1))) * (1.0 + 0.5 * std::sqrt(std::abs(t)));
  });
  e.rhs.flags.omega_descriptor = "s^(1/2)";
  e.rhs.flags.omega = [](double s) { return std::sqrt(s); };
  e.rhs.flags.h_bound = 0.75;
  e.boundary = [](double x1, double x2) { return 0.25 * (x1 * x1 - x2 * x2) + 0.125 * x1; };
  e.boundary_descriptor = "(x1^2-x2^2)/4 + x1/8";
  e.expected = {"yes", std::nullopt, "A holds: phi = 1 + |x1|^(1/2)/2 is Hoelder, so its potential is C^{1,1}; psi Hoelder"};
  e.provenance = "separable f = phi(x) psi(t)";
  e.scales = 3;
  return e;
}

CatalogEntry no_sign_model(const Parameters& params) {
  check_keys("no_sign_model", params, {"t_independent"});
  const bool tindep = param(params, "t_independent", 0.0) != 0.0;
  auto omega = [](double s) { return s < kClamp ? 0.0 : std::pow(-std::log(std::min(s, 0.1)), -2.0); };
  CatalogEntry e;
  e.name = "no_sign_model";
  e.parameters = {{"t_independent", tindep ? 1.0 : 0.0}};
  e.rhs = RhsSpec::no_sign([tindep, omega](double x1, double, double t) {
    return 1.0 + 0.5 * x1 + (tindep ? 0.0 : 0.5 * omega(std::abs(t)));
  });
  e.rhs.flags.omega_descriptor = tindep ? "zero" : "(-log s)^(-2)";
  e.rhs.flags.omega = tindep ? std::function<double(double)>([](double) { return 0.0; }) : omega;
  e.rhs.flags.h_bound = tindep ? 0.0 : 0.5;
  e.boundary = [](double x1, double) { return x1 > 0.0 ? 0.5 * x1 * x1 : 0.0; };
  e.boundary_descriptor = "max(x1,0)^2/2";
  e.expected = {"yes", std::nullopt, "g Dini in t"};
  e.provenance = "no-sign problem Delta u = g(x,u) chi_{u != 0}";
  e.clamps = {"omega(s) uses s = 0.1 for s > 0.1", "|t| < 1e-14: omega = 0"};
  e.exclude_free_boundary = true;
  e.nonnegative_branch = true;
  return e;
}

using Factory = CatalogEntry (*)(const Parameters&);

const std::vector<std::pair<std::string, Factory>>& registry() {
  static const std::vector<std::pair<std::string, Factory>> table = {
      {"log_counterexample_p", log_counterexample},
      {"classical_obstacle_halfspace", halfspace_obstacle},
      {"unstable_obstacle", unstable_obstacle},
      {"two_phase_membrane", membrane},
      {"dini_borderline", dini_borderline},
      {"mixed_pathology", mixed_pathology},
      {"separable", separable},
      {"no_sign_model", no_sign_model},
  };
  return table;
}

}  // namespace

nlohmann::json CatalogEntry::to_json() const {
  nlohmann::json sig = {{"c11", expected.c11}, {"assumption_flags", expected.assumption_flags}};
  if (expected.growth_exponent) sig["growth_exponent"] = *expected.growth_exponent;
  return {{"name", name},
          {"parameters", parameters},
          {"kind", to_string(rhs.kind)},
          {"boundary", boundary_descriptor},
          {"has_reference", reference != nullptr},
          {"solvable", solvable},
          {"nonnegative_branch", nonnegative_branch},
          {"expected_signature", sig},
          {"omega", rhs.flags.omega_descriptor},
          {"sigma0", rhs.flags.sigma0},
          {"provenance", provenance},
          {"clamps", clamps}};
}

CatalogEntry get(const std::string& name, const Parameters& params) {
  for (const auto& [key, factory] : registry())
    if (key == name) return factory(params);
  throw UnknownNameError("unknown problem '" + name + "'");
}

std::vector<std::string> list() {
  std::vector<std::string> names;
  for (const auto& entry : registry()) names.push_back(entry.first);
  return names;
}

CatalogEntry custom_problem(const std::string& kind, const std::map<std::string, std::string>& expressions,
                            const std::string& boundary) {
  auto expr = [&](const std::string& key) {
    const auto it = expressions.find(key);
    if (it == expressions.end()) throw ConfigError("inline " + kind + " problem needs '" + key + "'");
    return Expression::parse(it->second);
  };
  auto fn = [](Expression e) -> RhsFunction { return [e](double x1, double x2, double t) { return e(x1, x2, t); }; };
  CatalogEntry e;
  e.name = "inline";
  if (kind == "continuous") {
    e.rhs = RhsSpec::continuous(fn(expr("f")));
  } else if (kind == "two_phase") {
    e.rhs = RhsSpec::two_phase(fn(expr("g1")), fn(expr("g2")));
    e.exclude_free_boundary = true;
  } else if (kind == "no_sign") {
    e.rhs = RhsSpec::no_sign(fn(expr("g")));
    e.exclude_free_boundary = true;
  } else {
    throw ConfigError("unknown inline problem kind '" + kind + "'");
  }
  const Expression b = Expression::parse(boundary);
  if (b.uses_t()) throw ConfigError("boundary expression may not use t");
  e.boundary = [b](double x1, double x2) { return b(x1, x2); };
  e.boundary_descriptor = boundary;
  e.rhs.flags.omega_descriptor = "undeclared";
  e.provenance = "inline expressions";
  return e;
}

nlohmann::json ReferenceReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : residuals) rows.push_back({{"N", r.grid_size}, {"residual", r.residual}});
  return {{"available", available}, {"residuals", rows}, {"ratio", ratio}, {"passed", passed}};
}

ReferenceReport verify_reference(const CatalogEntry& entry, const std::vector<int>& grids) {
  ReferenceReport rep;
  if (!entry.reference) return rep;
  rep.available = true;
  const FieldPtr ref = entry.reference;
  const RhsSpec rhs = entry.rhs;
  for (int n : grids) {
    const ScalarField u = ScalarField::from_function(n, [&](double x1, double x2) { return ref->value(x1, x2); });
    const double h = u.spacing();
    const auto skip = [&](double x1, double x2) {
      if (std::hypot(x1, x2) < entry.inner_radius) return true;
      return entry.guard && entry.guard(x1, x2, h);
    };
    const double res =
        pde_residual(u, [&](double x1, double x2, double t) { return rhs(x1, x2, t); }, entry.outer_margin,
                     entry.exclude_free_boundary, skip);
    rep.residuals.push_back({n, res});
  }
  if (rep.residuals.size() >= 2) {
    const double coarse = rep.residuals[rep.residuals.size() - 2].residual;
    const double fine = rep.residuals.back().residual;
    rep.ratio = fine > 0.0 ? coarse / fine : std::numeric_limits<double>::infinity();
  }
  rep.passed = !rep.residuals.empty() && (rep.residuals.back().residual <= 1e-6 || rep.ratio >= 3.5);
  return rep;
}

FieldPtr solution_field(const Solution& sol, const RhsSpec& rhs) {
  const auto n = sol.u.grid_size();
  const double h = sol.u.spacing();
  if (rhs.kind == RhsKind::continuous) {
    return make_grid_field(sol.u, [u = sol.u, rhs](double x1, double x2) { return rhs(x1, x2, u.interpolate(x1, x2)); });
  }
  auto source = [u = sol.u, mu = sol.laplacian, phase = sol.phase, rhs, n, h](double x1, double x2) {
    const int i = std::clamp(static_cast<int>(std::lround((x1 + 1.0) / h)), 0, n - 1);
    const int j = std::clamp(static_cast<int>(std::lround((x2 + 1.0) / h)), 0, n - 1);
    auto ph = [&](int a, int b) {
      if (a < 0 || b < 0 || a >= n || b >= n) return static_cast<std::int8_t>(kFixed);
      return phase[static_cast<std::size_t>(b) * n + a];
    };
    const std::int8_t c = ph(i, j);
    if (c == kFixed) return rhs(x1, x2, u.interpolate(x1, x2));
    bool interface = c == kZero;
    for (const auto& [a, b] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
      const std::int8_t o = ph(i + a, j + b);
      interface = interface || (o != kFixed && o != c);
    }
    if (interface) return mu.at(i, j);
    // inside a signed phase the source follows that phase even where the
    // interpolant dips through zero
    return rhs(x1, x2, c > 0 ? std::max(u.interpolate(x1, x2), 1e-300) : std::min(u.interpolate(x1, x2), -1e-300));
  };
  return make_grid_field(sol.u, source);
}

PreparedField prepare_field(const CatalogEntry& entry, int grid_size, const SolverConfig& config) {
  PreparedField out;
  if (!entry.solvable) {
    const FieldPtr ref = entry.reference;
    out.grid = ScalarField::from_function(grid_size, [&](double x1, double x2) { return ref->value(x1, x2); });
    out.grid.metadata()["source"] = "closed form " + entry.name;
    const RhsSpec rhs = entry.rhs;
    out.field = make_grid_field(out.grid, [rhs](double x1, double x2) { return rhs(x1, x2, 0.0); });
    return out;
  }
  SolverConfig cfg = config;
  cfg.nonnegative_branch = cfg.nonnegative_branch || entry.nonnegative_branch;
  out.solution = solve(entry.rhs, entry.boundary, grid_size, cfg);
  out.grid = out.solution->u;
  out.grid.metadata()["source"] = "solve " + entry.name;
  out.field = solution_field(*out.solution, entry.rhs);
  return out;
}

}  // namespace semilinear
